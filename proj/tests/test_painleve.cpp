#include "autores/harness.hpp"
#include "autores/painleve.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace autores;
using doctest::Approx;

namespace {

// First real pole of the decreasing P1 solution, computed once by
// locate_first_pole at rel 1e-10 and cross-checked over seeds −50/−75/−100
// and tolerances 1e-9 through 1e-11.
constexpr double kZ0 = 2.38416876956;

const Painleve1Solution& reference_solution() {
  static const Painleve1Solution sol = first_pole_solution();
  return sol;
}

} // namespace

TEST_CASE("seed leading order") {
  SeedOptions lead;
  lead.branch = P1Branch::Positive;
  lead.terms = 0;
  CHECK(seed_asymptotic(-96.0, lead).first == Approx(4.0).epsilon(1e-14));
  CHECK(seed_asymptotic(-600.0, lead).first == Approx(10.0).epsilon(1e-14));
  lead.branch = P1Branch::Negative;
  CHECK(seed_asymptotic(-96.0, lead).first == Approx(-4.0).epsilon(1e-14));

  const auto [y, yp] = seed_asymptotic(-96.0);
  CHECK(std::abs(y + 4.0) < 1e-3);
  CHECK(yp > 0.0);
}

TEST_CASE("seed derivative matches the series") {
  const double h = 1e-4;
  for (double z : {-60.0, -100.0, -400.0}) {
    const double fd = (seed_asymptotic(z + h).first - seed_asymptotic(z - h).first) / (2 * h);
    CHECK(seed_asymptotic(z).second == Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("seed refusals") {
  CHECK_THROWS_AS(seed_asymptotic(-10.0), DomainError);
  SeedOptions bad;
  bad.terms = 5;
  CHECK_THROWS_AS(seed_asymptotic(-100.0, bad), DomainError);
  bad.terms = -1;
  CHECK_THROWS_AS(seed_asymptotic(-100.0, bad), DomainError);
}

TEST_CASE("seed abscissa does not matter") {
  const auto a = solve_p1(-50.0, -20.0);
  const auto b = solve_p1(-100.0, -20.0);
  CHECK(std::abs(a.y(-20.0) - b.y(-20.0)) < 1e-6);
  CHECK(std::abs(a.yprime(-20.0) - b.yprime(-20.0)) < 1e-6);
}

TEST_CASE("solution tracks the algebraic asymptote") {
  const auto sol = solve_p1(-100.0, -30.0);
  for (double z = -100.0; z <= -30.0; z += 2.5) {
    const double lead = -std::sqrt(-z / 6.0);
    CHECK(std::abs(sol.y(z) - lead) < 1.0 / std::sqrt(-z));
  }
}

TEST_CASE("flipped branch departs from its asymptote") {
  SeedOptions pos;
  pos.branch = P1Branch::Positive;
  const auto sol = solve_p1(-100.0, -20.0, p1_default_config(), pos);
  bool departed = sol.blew_up;
  for (std::size_t i = 0; i < sol.traj.size() && !departed; ++i) {
    const double z = sol.traj.time(i);
    departed = std::abs(sol.traj.value(i, 0) - std::sqrt(-z / 6.0)) > 1.0;
  }
  CHECK(departed);
}

TEST_CASE("defect stays at tolerance level") {
  const auto& sol = reference_solution();
  CHECK(sol.blew_up);
  CHECK(p1_defect(sol) < 10.0 * sol.cfg.rel_tol);
}

TEST_CASE("first pole") {
  const auto& sol = reference_solution();
  CHECK(sol.z0 == Approx(kZ0).epsilon(1e-9));
  CHECK(sol.z0_err < 1e-8);
  CHECK(std::abs(sol.pole_order + 2.0) < 0.05);
}

TEST_CASE("pole is stable under seed and tolerance changes") {
  const double ref = reference_solution().z0;
  for (double zs : {-50.0, -75.0}) {
    const auto s = first_pole_solution(zs);
    CHECK(std::abs(s.z0 - ref) / ref < 1e-5);
  }
  for (double rel : {1e-9, 1e-11}) {
    IntegratorConfig cfg = p1_default_config();
    cfg.rel_tol = rel;
    cfg.abs_tol = rel / 100.0;
    const auto s = first_pole_solution(-100.0, cfg);
    CHECK(std::abs(s.z0 - ref) / ref < 1e-6);
  }
}

TEST_CASE("inner scales") {
  Params p(1.0, 0.1);
  CHECK(p1_time_scale(p) == Approx(std::pow(6.0, 0.2)));
  CHECK(p1_amplitude_scale(p) == Approx(std::pow(6.0, 0.6)));
  CHECK(inner_pole(p, kZ0) == Approx(std::pow(6.0, 0.2) * kZ0 - 0.25));
  Params q(2.0, 0.1);
  CHECK(p1_time_scale(q) == Approx(std::pow(1.5, 0.2)));
}

TEST_CASE("calibration recovers a synthetic amplitude") {
  const auto& sol = reference_solution();
  Params p(1.0, 0.01);
  const double mu = p1_time_scale(p);
  const double kappa_true = -1.2345;
  std::vector<double> taus, us;
  for (int k = 0; k < 200; ++k) {
    const double t = -6.0 + 5.0 * k / 199.0;
    taus.push_back(t);
    us.push_back(kappa_true * sol.y((t + 0.25) / mu));
  }
  const MatchCalibration c = calibrate_samples(p, taus, us, sol);
  CHECK(c.kappa == Approx(kappa_true).epsilon(1e-6));
  CHECK(c.sigma == -1);
  CHECK(c.rms_mismatch < 1e-10);
  CHECK(c.ok);
  REQUIRE(c.candidates.size() == 5);
  CHECK(c.candidates[0].kappa == Approx(p1_amplitude_scale(p)));
  for (std::size_t i = 1; i < c.candidates.size(); ++i) CHECK(!c.candidates[i].name.empty());
}

TEST_CASE("calibration against a simulated capture") {
  const auto& sol = reference_solution();
  Params p(1.0, 0.005);
  const double d = p.delta();
  const double theta_start = 0.9;
  const PolarState s = outer_solution(theta_start, p, 2);
  const double theta_end = 1.0 - d + d * d * (inner_pole(p, sol.z0) + 1.0);
  const Trajectory tr =
      simulate_capture(p, std::polar(s.R / d, s.phi), theta_end / (d * d), capture_config(), theta_start / (d * d));
  const MatchCalibration c = calibrate(p, tr, sol);
  CHECK(c.rms_mismatch < 0.05);
  CHECK(c.ok);
  CHECK(c.sigma == 1);
  CHECK(c.kappa == Approx(p1_amplitude_scale(p)).epsilon(0.05));
}
