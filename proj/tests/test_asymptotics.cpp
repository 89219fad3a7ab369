#include "autores/asymptotics.hpp"
#include "autores/painleve.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace autores;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZ0 = 2.38416876956; // first P1 pole, see test_painleve

double residual_order(const IntermediateOptions& opt, double f, double eta, double d1, double d2) {
  const double r1 = intermediate_residual(IntermediateSeries(Params(f, d1), opt), eta);
  const double r2 = intermediate_residual(IntermediateSeries(Params(f, d2), opt), eta);
  return std::log(r1 / r2) / std::log(d1 / d2);
}

} // namespace

TEST_CASE("outer leading coefficients") {
  Params p(1.0, 0.01);
  const OuterCoefficients a = OuterSeries(p).coefficients(0.5);
  CHECK(a.alpha[0] == Approx(-0.75 * kPi));
  CHECK(a.rho[0] == Approx(std::sqrt(0.5)));
  CHECK(a.alpha[1] == Approx(1.0));
  CHECK(a.rho[1] == Approx(-std::sqrt(2.0)));

  OuterOptions rep;
  rep.branch = OuterBranch::Repelling;
  const OuterCoefficients b = OuterSeries(p, rep).coefficients(0.5);
  CHECK(b.alpha[0] == Approx(-0.25 * kPi));
  CHECK(b.rho[0] == Approx(-std::sqrt(0.5)));
  CHECK(b.alpha[1] == Approx(-1.0));
}

TEST_CASE("outer leading state is locked") {
  // sin α₀ = −√θ/f and R → √θ: the forcing balances dissipation-free growth.
  Params p(1.3, 0.001);
  const OuterSeries s(p, {.k_max = 0});
  for (double th : {0.2, 0.8, 1.4}) {
    const PolarState st = s.evaluate(th);
    CHECK(std::sin(st.phi) == Approx(-std::sqrt(th) / 1.3));
    CHECK(std::cos(st.phi) < 0.0);
    CHECK(st.R == Approx(std::sqrt(th)).epsilon(1e-6));
  }
}

TEST_CASE("third order needs opting in") {
  Params p(1.0, 0.01);
  CHECK_THROWS_AS(OuterSeries(p, {.k_max = 3}), DomainError);
  CHECK_THROWS_AS(OuterSeries(p, {.k_max = 4, .third_order = true}), DomainError);
  CHECK_THROWS_AS(OuterSeries(p, {.k_max = -1}), DomainError);
  CHECK_NOTHROW(OuterSeries(p, {.k_max = 3, .third_order = true}));
}

TEST_CASE("outer residual orders") {
  for (double f : {0.7, 1.0, 1.3}) {
    const double th = 0.5 * f * f;
    for (int k = 0; k <= 2; ++k) {
      const double order = outer_residual_order(f, th, 0.02, 0.01, {.k_max = k});
      CHECK(order == Approx(4.0 + k).epsilon(0.5 / (4.0 + k)));
    }
  }
  const double derived = outer_residual_order(1.0, 0.5, 0.02, 0.01, {.k_max = 3, .third_order = true});
  CHECK(derived == Approx(7.0).epsilon(0.5 / 7.0));
  const double printed = outer_residual_order(
      1.0, 0.5, 0.02, 0.01, {.k_max = 3, .third_order = true, .third_order_form = ThirdOrderForm::Printed});
  CHECK(printed < 6.5);
  CHECK(outer_residual_order(1.0, 0.5, 0.05, 0.025, {.k_max = 2}) >= 2.5);
}

TEST_CASE("repelling branch is also a formal solution") {
  const OuterOptions rep{.k_max = 1, .branch = OuterBranch::Repelling};
  CHECK(outer_residual_order(1.0, 0.5, 0.02, 0.01, rep) == Approx(5.0).epsilon(0.1));
}

TEST_CASE("outer domain refusal") {
  Params p(1.0, 0.05);
  const OuterSeries s(p);
  CHECK(s.in_domain(0.3));
  CHECK_FALSE(s.in_domain(0.6)); // δ/(f² − θ) = 0.125
  CHECK_THROWS_AS(s.evaluate(0.6), DomainError);
  CHECK_THROWS_AS(s.evaluate(0.0), DomainError);
  CHECK_THROWS_AS(s.evaluate(1.2), DomainError);
  CHECK_THROWS_AS(s.truncation_error(0.6), DomainError);
}

TEST_CASE("outer amplitude increases with theta") {
  for (double d : {0.01, 0.005, 0.001}) {
    Params p(1.0, d);
    const OuterSeries s(p);
    double prev = 0.0;
    for (double th = 0.01; th < 0.9; th += 0.01) {
      if (!s.in_domain(th)) continue;
      const double R = s.evaluate(th).R;
      CHECK(R > prev);
      prev = R;
    }
  }
}

TEST_CASE("truncation error shrinks with delta") {
  const double e1 = OuterSeries(Params(1.0, 0.02)).truncation_error(0.5).second;
  const double e2 = OuterSeries(Params(1.0, 0.01)).truncation_error(0.5).second;
  CHECK(e1 / e2 == Approx(8.0));
}

TEST_CASE("intermediate leading order") {
  Params p(1.0, 0.001);
  const IntermediateValue v = intermediate_solution(-2.0, p, 0);
  CHECK(v.r == Approx(-1.0));
  CHECK(v.a * v.a == Approx(1.0));
  CHECK(v.a < 0.0);

  IntermediateOptions wide;
  wide.validity = 1e12;
  const IntermediateValue edge = intermediate_solution(-1.0 - 1e-10, p, 0, wide);
  CHECK(std::abs(edge.a) < 1e-4);
  CHECK_THROWS_AS(intermediate_solution(-1.0, p, 0, wide), DomainError);
  CHECK_THROWS_AS(intermediate_solution(-0.5, p, 0), DomainError);
  CHECK_THROWS_AS(intermediate_solution(-1.005, p, 0), DomainError); // δ/(−1 − η) = 0.2
}

TEST_CASE("intermediate residual orders") {
  for (int k = 0; k <= 2; ++k) {
    IntermediateOptions opt;
    opt.k_max = k;
    const double order = residual_order(opt, 1.3, -3.0, 0.01, 0.005);
    CHECK(order == Approx(2.0 + k).epsilon(0.5 / (2.0 + k)));
  }
}

TEST_CASE("outer and intermediate overlap") {
  Params p(1.0, 0.01);
  const double th = 0.97;
  const OuterSeries outer(p, {.k_max = 2, .validity = 0.5});
  IntermediateOptions io;
  io.k_max = 2;
  const IntermediateSeries inter(p, io);
  const PolarState a = outer.evaluate(th);
  const PolarState b = inter.polar((th - 1.0) / 0.01);
  CHECK(std::abs(a.R - b.R) < 1e-4);
  CHECK(std::abs(unwrap_near(a.phi, b.phi) - b.phi) < 1e-2);
}

TEST_CASE("intermediate branch selection") {
  for (double f : {0.7, 1.0, 1.5}) {
    Params p(f, 0.001);
    const double f2 = f * f;
    const BranchChoice c = select_intermediate_branch(p, f2 - 0.05, f2 - 0.02);
    CHECK(c.q == 2);
    CHECK(c.sigma == -1);
    CHECK(c.rms[3] <= *std::min_element(c.rms.begin(), c.rms.end()));
  }
  CHECK_THROWS_AS(select_intermediate_branch(Params(1.0, 0.01), 0.5, 0.995), DomainError);
}

TEST_CASE("prediction at f=1, delta=0.1") {
  Params p(1.0, 0.1);
  const Prediction pr = predict(p, kZ0);
  CHECK(pr.tau_star == Approx(100.0));
  CHECK(pr.R_star_psi == Approx(0.95));
  CHECK(pr.R_star_Psi == Approx(9.5));
  CHECK(pr.theta_star_printed_scale == Approx(0.9 + 0.01 * (kZ0 / 6.0 - 0.25)));
  const double mu = std::pow(6.0, 0.2);
  CHECK(pr.tau0 == Approx(mu * kZ0 - 0.25));
  CHECK(pr.theta_star == Approx(0.9 + 0.01 * (mu * kZ0 - 0.25)));
  CHECK(pr.tau_star_refined == Approx(pr.theta_star / 0.01));
  CHECK(pr.z0_used == kZ0);
}

TEST_CASE("refined break precedes the crude bound") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> F(0.2, 3.0), D(0.001, 0.99);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const double f = F(rng);
    Params p(f, D(rng) * f);
    Prediction pr;
    try {
      pr = predict(p, kZ0);
    } catch (const DomainError&) {
      CHECK(p.delta() * (p1_time_scale(p) * kZ0 - 0.25 / (f * f)) >= 1.0);
      continue;
    }
    CHECK(pr.tau_star_refined < pr.tau_star);
    CHECK(pr.theta_star < f * f);
    ++checked;
  }
  CHECK(checked > 100);
  CHECK_THROWS_AS(predict(Params(1.0, 0.5), kZ0), DomainError);
}

TEST_CASE("wkb eigenvalues") {
  Params p(1.0, 0.01);
  const auto [l1, l2] = wkb_eigenvalues(0.5, p);
  CHECK(l1.real() == Approx(-0.005));
  CHECK(std::abs(l1.imag()) == Approx(0.1));
  CHECK(l2 == std::conj(l1));
  double prev = 1.0;
  for (double gap : {1e-2, 1e-4, 1e-8, 1e-12}) {
    const double w = std::abs(wkb_eigenvalues(1.0 - gap, p).first.imag());
    CHECK(w < prev);
    prev = w;
  }
  CHECK(prev < 2e-4);
}

TEST_CASE("linearized eigenvalues") {
  for (double d : {0.01, 0.001}) {
    Params p(1.0, d);
    const auto [l1, l2] = linearized_eigenvalues(0.5, p);
    CHECK(l1.real() == Approx(-d * d).epsilon(1e-6));
    CHECK(std::abs(l1.imag()) == Approx(std::abs(wkb_eigenvalues(0.5, p).first.imag())).epsilon(0.01));
    CHECK(l2 == std::conj(l1));
    CHECK(lock_frequency(0.5, p) == Approx(std::abs(l1.imag()) / d));
  }
}

namespace {

MatchCalibration derived_calibration(const Params& p) {
  MatchCalibration c;
  c.kappa = p1_amplitude_scale(p);
  c.sigma = 1;
  c.mu = p1_time_scale(p);
  c.ok = true;
  return c;
}

const Painleve1Solution& p1() {
  static const Painleve1Solution sol = first_pole_solution();
  return sol;
}

} // namespace

TEST_CASE("inner solution far from the pole") {
  for (double f : {1.0, 0.8}) {
    Params p(f, 1e-4);
    const MatchCalibration c = derived_calibration(p);
    for (double t : {-30.0, -60.0, -100.0}) {
      const InnerValue v = painleve_region_solution(t, p, c, p1());
      CHECK(std::abs(v.u + std::sqrt(-t) / f) < 1.0 / std::sqrt(-t));
      const double v_asym = t / (4 * f * f * f) - 1.0 / (16 * std::pow(f, 5));
      CHECK(std::abs(v.v - v_asym) < 1.0 / std::sqrt(-t));
    }
  }
}

TEST_CASE("inner solution refuses the pole neighbourhood") {
  Params p(1.0, 0.01);
  const MatchCalibration c = derived_calibration(p);
  const double tau0 = inner_pole(p, p1().z0);
  CHECK_THROWS_AS(painleve_region_solution(tau0 - 0.5, p, c, p1()), DomainError);
  CHECK_THROWS_AS(painleve_region_solution(tau0 + 0.5, p, c, p1()), DomainError);
  CHECK_NOTHROW(painleve_region_solution(tau0 - 2.0, p, c, p1()));
}

TEST_CASE("inner and intermediate phases overlap") {
  Params p(1.0, 1e-4);
  const MatchCalibration c = derived_calibration(p);
  const double d = p.delta();
  for (double t : {-30.0, -50.0}) {
    const InnerValue in = painleve_region_solution(t, p, c, p1());
    const double eta = -1.0 + d * t;
    const IntermediateValue mid = intermediate_solution(eta, p, 1);
    CHECK(std::sqrt(d) * in.u == Approx(mid.a).epsilon(0.05));
  }
}
