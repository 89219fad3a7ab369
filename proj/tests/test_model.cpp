#include "autores/model.hpp"

#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace autores;
using doctest::Approx;

TEST_CASE("complex form") {
  Params p(1.0, 0.1);
  Vec2 d = rhs_complex_pr(3.0, {0.0, 0.0}, p);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == -1.0);
  Vec2 z = rhs_complex_pr(1.0, {1.0, 0.0}, Params::control(0.0, 0.0));
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
}

TEST_CASE("polar form") {
  Params p(1.0, 0.1);
  const double tau = 4.0;
  Vec2 d = rhs_polar_pr(tau, {2.0, 0.0}, p);
  CHECK(d[0] == Approx(-0.2));
  CHECK(d[1] == Approx(-0.5));
  Params q(1.5, 0.1);
  d = rhs_polar_pr(2.25, {1.5, 1.5 * std::numbers::pi}, q);
  CHECK(d[0] == Approx(-0.15 + 1.5));
  CHECK(std::abs(d[1]) < 1e-12);
  CHECK_THROWS_AS(rhs_polar_pr(1.0, {0.0, 1.0}, p), DomainError);
  CHECK_THROWS_AS(rhs_polar_pr(1.0, {-1.0, 1.0}, p), DomainError);
}

TEST_CASE("polar and complex forms agree under the chain rule") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> R(0.01, 20.0), ph(-10.0, 10.0), tau(-5.0, 300.0),
      f(0.2, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double fv = f(rng);
    Params p(fv, 0.1 * fv);
    const double r = R(rng), phi = ph(rng), t = tau(rng);
    const std::complex<double> psi = std::polar(r, phi);
    Vec2 dc = rhs_complex_pr(t, {psi.real(), psi.imag()}, p);
    const std::complex<double> dpsi(dc[0], dc[1]);
    const std::complex<double> ratio = dpsi / psi; // = R'/R + iφ'
    Vec2 dp = rhs_polar_pr(t, {r, phi}, p);
    const double scale = std::max(1.0, std::abs(dp[0]) + std::abs(dp[1]));
    CHECK(std::abs(ratio.real() * r - dp[0]) <= 1e-10 * scale);
    CHECK(std::abs(ratio.imag() - dp[1]) <= 1e-10 * scale);
  }
}

TEST_CASE("rescaled form") {
  Params p(1.0, 0.1);
  Vec2 d = rhs_rescaled_pr(0.5, {0.0, 0.0}, p);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == Approx(-10.0));
  const std::complex<double> psi = std::polar(std::sqrt(0.5), 0.7);
  d = rhs_rescaled_pr(0.5, {psi.real(), psi.imag()}, p);
  const std::complex<double> expect = -(psi + std::complex<double>(0, 1)) / 0.1;
  CHECK(d[0] == Approx(expect.real()));
  CHECK(d[1] == Approx(expect.imag()));
}

TEST_CASE("rescaled form is the complex form in θ variables") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0), th(0.0, 1.0);
  Params p(1.0, 0.05);
  const double d = p.delta();
  for (int i = 0; i < 200; ++i) {
    const std::complex<double> Psi(u(rng) / d, u(rng) / d);
    const double theta = th(rng);
    Vec2 a = rhs_complex_pr(theta / (d * d), {Psi.real(), Psi.imag()}, p);
    Vec2 b = rhs_rescaled_pr(theta, {d * Psi.real(), d * Psi.imag()}, p);
    // dψ/dθ = δ·dΨ/dτ · dτ/dθ = δ⁻¹ dΨ/dτ
    CHECK(b[0] == Approx(a[0] / d).epsilon(1e-12));
    CHECK(b[1] == Approx(a[1] / d).epsilon(1e-12));
  }
}

TEST_CASE("Duffing field") {
  DuffingParams dp{.eps = 0.01, .b = 0.0, .A = 3.0};
  Vec2 d = rhs_duffing(0.0, {0.0, 0.0}, dp);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == Approx(0.03));

  DuffingParams lin{.eps = 0.0, .b = 0.0, .A = 0.0, .c = 0.0};
  std::vector<double> y0{1.0, 0.0};
  std::vector<Event> ev{Event::crossing(1, 0.0, Direction::Rising, false)};
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  Trajectory tr = integrate(vector_field(lin), y0, 0.0, 30.0, cfg, ev);
  // u' crosses zero upward at t = π + 2πk.
  REQUIRE(tr.events.size() >= 3);
  CHECK(std::abs(tr.events[1].time - tr.events[0].time - 2 * std::numbers::pi) < 1e-8);
  CHECK(std::abs(tr.events[2].time - tr.events[1].time - 2 * std::numbers::pi) < 1e-8);
}

TEST_CASE("fast motion field and energy") {
  Params p(1.0, 0.1);
  Vec2 d = rhs_fast_motion(0.0, {0.0, 0.0}, p);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  Params q(2.0, 0.1);
  d = rhs_fast_motion(0.0, {0.0, std::numbers::pi}, q);
  CHECK(d[0] == Approx(-4.0));
  CHECK(d[1] == 0.0);
  CHECK(fast_motion_energy({0.0, 0.0}) == 0.0);
  CHECK(fast_motion_energy({1.0, 0.0}) == 1.0);
}

namespace {

double energy_drift(const Params& p, std::vector<double> y0, const IntegratorConfig& cfg,
                    double* s_scale = nullptr) {
  Trajectory tr = integrate(vector_field(ModelSystem::FastMotion, p), y0, 0.0, 50.0, cfg);
  const double e0 = fast_motion_energy({y0[0], y0[1]});
  double drift = 0.0, smax = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    drift = std::max(drift, std::abs(fast_motion_energy({tr.value(i, 0), tr.value(i, 1)}) - e0));
    smax = std::max(smax, std::abs(tr.value(i, 1)));
  }
  if (s_scale) *s_scale = smax;
  return drift;
}

} // namespace

TEST_CASE("fast motion conserves energy near the fixed point") {
  for (double f : {0.5, 1.0, 2.0}) {
    CHECK(energy_drift(Params(f, 0.1 * f), {0.0, 1e-4}, {}) < 1e-8);
    CHECK(energy_drift(Params(f, 0.1 * f), {0.0, 0.0}, {}) == 0.0);
  }
}

TEST_CASE("fast motion energy drift on running-phase trajectories") {
  // s grows like f²ξ², so the absolute drift scales with |s|·rel_tol.
  for (double f : {0.5, 1.0}) {
    Params p(f, 0.05);
    const double s0 = std::numbers::pi / 2;
    std::vector<double> y0{-std::sqrt(0.063 - std::sin(s0) + s0), s0};
    double smax = 0.0;
    const double d = energy_drift(p, y0, {}, &smax);
    CHECK(smax > 100.0);
    CHECK(d < 1e-7 * smax);
    IntegratorConfig tight;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 1e-15;
    CHECK(energy_drift(p, y0, tight) < 1e-8);
  }
}

TEST_CASE("undriven amplitude decays exactly") {
  Params p = Params::control(0.0, 0.1);
  std::vector<double> y0{1.5, -0.5};
  IntegratorConfig cfg;
  Trajectory tr = integrate(vector_field(ModelSystem::ComplexPR, p), y0, 0.0, 20.0, cfg);
  const double r0 = std::hypot(1.5, 0.5);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double r = std::hypot(tr.value(i, 0), tr.value(i, 1));
    CHECK(std::abs(r - r0 * std::exp(-0.1 * tr.time(i))) < 1e-8);
  }
}

TEST_CASE("system metadata") {
  CHECK(dimension(ModelSystem::PolarPR) == 2);
  CHECK(to_string(ModelSystem::FastMotion) == "fast_motion");
  CHECK_THROWS_AS(vector_field(ModelSystem::Duffing, Params(1.0, 0.1)), DomainError);
}
