#include "autores/cli.hpp"
#include "autores/report.hpp"

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace autores;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("autores_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    ::setenv("AUTORES_CACHE_DIR", (d / "cache").c_str(), 1);
    return d;
  }();
  return dir;
}

Result run(std::vector<std::string> args) {
  scratch();
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST_CASE("float formatting and key order") {
  CHECK(report::format_double(100.0) == "1.0000000000000000e+02");
  CHECK(report::format_double(-0.1) == "-1.0000000000000001e-01");
  CHECK(report::format_double(std::nan("")) == "null");
  const report::Json j = {{"b", 1}, {"a", {{"d", 0.5}, {"c", report::Json::array({1, 2})}}}};
  CHECK(report::dump(j, -1) == R"({"a":{"c":[1,2],"d":5.0000000000000000e-01},"b":1})");
  CHECK(report::dump(j) == "{\n  \"a\": {\n    \"c\": [1, 2],\n    \"d\": 5.0000000000000000e-01\n  },\n  \"b\": 1\n}\n");
}

TEST_CASE("predict reports the pole and its provenance") {
  const Result r = run({"predict", "--f", "1", "--delta", "0.1"});
  REQUIRE(r.code == 0);
  const auto j = report::Json::parse(r.out);
  CHECK(j.at("z0").get<double>() == doctest::Approx(2.38416876956).epsilon(1e-9));
  CHECK(j.at("z0_err").get<double>() < 1e-8);
  CHECK(j.at("pole_order").get<double>() == doctest::Approx(-2.0).epsilon(0.01));
  CHECK(j.at("z0_provenance") == "computed");
  CHECK(j.at("tau_star").get<double>() == doctest::Approx(100.0));
  CHECK(!j.contains("tau_break_measured"));

  // Cached and recomputed poles print identically.
  CHECK(run({"predict", "--f", "1", "--delta", "0.1"}).out == r.out);
  CHECK(run({"--no-cache", "predict", "--f", "1", "--delta", "0.1"}).out == r.out);
}

TEST_CASE("exit codes and error lines") {
  Result r = run({"simulate", "--f", "1", "--delta", "-1"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.out.empty());
  CHECK(r.err.find('\n') == r.err.size() - 1);
  const auto e = report::Json::parse(r.err);
  CHECK(e.at("exit_code") == 2);
  CHECK(e.at("kind") == "domain");

  CHECK(run({"predict", "--f", "1"}).code == cli::kExitUsage);
  CHECK(run({"predict", "--f", "1", "--delta", "abc"}).code == cli::kExitUsage);
  CHECK(run({"predict", "--f", "1", "--delta", "0.5"}).code == cli::kExitUsage);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"painleve", "--z-seed", "30"}).code == cli::kExitUsage);
  CHECK(run({"painleve", "--z-seed", "-20"}).code == cli::kExitUsage);
  CHECK(run({"--rel-tol", "-1", "simulate", "--f", "1", "--delta", "0.1"}).code == cli::kExitUsage);
  CHECK(run({"validate", "sweep", "--deltas", "0.1,0.05"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("simulate writes csv and json and repeats byte for byte") {
  const fs::path a = scratch() / "a", b = scratch() / "b";
  const std::vector<std::string> common = {"simulate", "--f", "1", "--delta", "0.1", "--tau-max", "40"};
  auto args = common;
  args.insert(args.end(), {"-o", a.string()});
  REQUIRE(run(args).code == 0);
  args = common;
  args.insert(args.end(), {"-o", b.string()});
  REQUIRE(run(args).code == 0);

  const std::string csv = slurp(a.string() + ".csv");
  CHECK(csv.rfind("tau,psi_re,psi_im,R,phi\n", 0) == 0);
  CHECK(csv == slurp(b.string() + ".csv"));

  const auto j = report::Json::parse(slurp(a.string() + ".json"));
  CHECK(j.at("break").at("broke") == false);
  CHECK(j.at("break").at("tau_lower_bound").get<double>() == doctest::Approx(40.0));
  CHECK(j.at("status") == "completed");

  const fs::path c = scratch() / "c";
  auto jargs = common;
  jargs.insert(jargs.end(), {"--format", "json", "-o", c.string()});
  REQUIRE(run(jargs).code == 0);
  const auto jc = report::Json::parse(slurp(c.string() + ".json"));
  CHECK(jc.at("samples").size() == j.at("samples_count").get<std::size_t>());
  CHECK(!fs::exists(c.string() + ".csv"));
}

TEST_CASE("painleve output") {
  const fs::path p = scratch() / "p1";
  REQUIRE(run({"painleve", "-o", p.string()}).code == 0);
  CHECK(slurp(p.string() + ".csv").rfind("z,y,yprime\n", 0) == 0);
  const auto j = report::Json::parse(slurp(p.string() + ".json"));
  CHECK(j.at("z0").get<double>() == doctest::Approx(2.38416876956).epsilon(1e-9));
}

TEST_CASE("config file values are overridden by flags") {
  const fs::path cfg = scratch() / "predict.ini";
  std::ofstream(cfg) << "[predict]\nf = 1\ndelta = 0.3\n";
  const auto from_file = report::Json::parse(run({"predict", "--config", cfg.string()}).out);
  CHECK(from_file.at("params").at("delta").get<double>() == doctest::Approx(0.3));
  const auto overridden =
      report::Json::parse(run({"predict", "--config", cfg.string(), "--delta", "0.05"}).out);
  CHECK(overridden.at("params").at("delta").get<double>() == doctest::Approx(0.05));
}

TEST_CASE("validate writes its report even when a check fails") {
  const fs::path out = scratch() / "stab.json";
  const Result r = run({"validate", "stability", "--delta", "0.05", "--perturbation", "0.1", "--directions", "1",
                        "-o", out.string()});
  CHECK(r.code == cli::kExitCheckFailed);
  const auto j = report::Json::parse(slurp(out));
  CHECK(j.at("passed") == false);
  CHECK(r.out == slurp(out));
}
