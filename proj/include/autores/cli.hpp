#pragma once

// Command-line front end: simulate, predict, painleve and validate.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace autores::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// AUTORES_CACHE_DIR, else $XDG_CACHE_HOME/autores, else ~/.cache/autores.
std::optional<std::filesystem::path> cache_dir();

} // namespace autores::cli
