#include "autores/model.hpp"

#include <cmath>

namespace autores {

Vec2 rhs_complex_pr(double tau, const Vec2& psi, const Params& p) {
  const double re = psi[0], im = psi[1];
  const double w = tau - (re * re + im * im);
  const double d = p.delta();
  return {-w * im - d * re, w * re - d * im - p.f()};
}

Vec2 rhs_polar_pr(double tau, const Vec2& rphi, const Params& p) {
  const double R = rphi[0], phi = rphi[1];
  if (!(R > 0.0)) throw DomainError("polar form is singular at R <= 0");
  return {-p.delta() * R - p.f() * std::sin(phi), tau - R * R - p.f() / R * std::cos(phi)};
}

Vec2 rhs_rescaled_pr(double theta, const Vec2& psi, const Params& p) {
  const double d = p.delta();
  if (!(d > 0.0)) throw DomainError("rescaled form needs delta > 0");
  const double re = psi[0], im = psi[1];
  const double w = (theta - (re * re + im * im)) / (d * d * d * d);
  return {-w * im - re / d, w * re - im / d - p.f() / d};
}

Vec2 rhs_duffing(double t, const Vec2& state, const DuffingParams& dp) {
  const double u = state[0], v = state[1];
  const double drive = dp.eps * dp.A * std::cos(dp.drive_phase(t));
  return {v, -u - dp.b * v + dp.c * u * u * u + drive};
}

Vec2 rhs_fast_motion(double /*xi*/, const Vec2& ps, const Params& p) {
  const double f = p.f();
  return {-f * (1.0 - std::cos(ps[1])), -2.0 * f * ps[0]};
}

double fast_motion_energy(const Vec2& ps) { return ps[0] * ps[0] + std::sin(ps[1]) - ps[1]; }

std::string to_string(ModelSystem s) {
  switch (s) {
  case ModelSystem::ComplexPR: return "complex";
  case ModelSystem::PolarPR: return "polar";
  case ModelSystem::RescaledPR: return "rescaled";
  case ModelSystem::Duffing: return "duffing";
  case ModelSystem::FastMotion: return "fast_motion";
  }
  return "unknown";
}

std::size_t dimension(ModelSystem) { return 2; }

namespace {

template <class F>
VectorField wrap(F f) {
  return [f](double t, std::span<const double> y, std::span<double> dy) {
    const Vec2 out = f(t, Vec2{y[0], y[1]});
    dy[0] = out[0];
    dy[1] = out[1];
  };
}

} // namespace

VectorField vector_field(ModelSystem s, const Params& p) {
  switch (s) {
  case ModelSystem::ComplexPR:
    return wrap([p](double t, const Vec2& y) { return rhs_complex_pr(t, y, p); });
  case ModelSystem::PolarPR:
    return wrap([p](double t, const Vec2& y) { return rhs_polar_pr(t, y, p); });
  case ModelSystem::RescaledPR:
    return wrap([p](double t, const Vec2& y) { return rhs_rescaled_pr(t, y, p); });
  case ModelSystem::FastMotion:
    return wrap([p](double t, const Vec2& y) { return rhs_fast_motion(t, y, p); });
  case ModelSystem::Duffing:
    throw DomainError("the Duffing field needs DuffingParams");
  }
  throw DomainError("unknown system");
}

VectorField vector_field(const DuffingParams& dp) {
  return wrap([dp](double t, const Vec2& y) { return rhs_duffing(t, y, dp); });
}

} // namespace autores
