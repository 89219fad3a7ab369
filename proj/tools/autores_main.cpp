#include "autores/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return autores::cli::run(argc, argv, std::cout, std::cerr); }
