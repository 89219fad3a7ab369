#include "autores/core.hpp"

#include <cmath>
#include <numbers>

namespace autores {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

} // namespace

Params::Params(double f, double delta) : f_(f), delta_(delta) {
  require_finite(f, "f");
  require_finite(delta, "delta");
  if (f <= 0.0) throw DomainError("f must be positive");
  if (delta <= 0.0) throw DomainError("delta must be positive");
  if (delta >= f) throw DomainError("delta must be smaller than f");
}

Params Params::control(double f, double delta) {
  require_finite(f, "f");
  require_finite(delta, "delta");
  if (f < 0.0 || delta < 0.0) throw DomainError("control parameters must be nonnegative");
  return Params(f, delta, Unchecked{});
}

double DuffingParams::chirp_rate() const {
  return alpha ? *alpha : 4.0 * std::pow(eps, 4.0 / 3.0);
}

double DuffingParams::slow_rate() const { return 2.0 * std::cbrt(eps * eps); }

double DuffingParams::amplitude_scale() const { return std::cbrt(eps) / std::numbers::sqrt2; }

double DuffingParams::drive_phase(double t) const { return t - 0.5 * chirp_rate() * t * t; }

double DuffingParams::drive_frequency(double t) const { return 1.0 - chirp_rate() * t; }

Params map_duffing_params(const DuffingParams& dp) {
  require_finite(dp.eps, "eps");
  require_finite(dp.b, "b");
  require_finite(dp.A, "A");
  if (dp.eps <= 0.0) throw DomainError("eps must be positive");
  if (dp.b < 0.0) throw DomainError("b must be nonnegative");
  if (dp.alpha && !(*dp.alpha > 0.0)) throw DomainError("chirp rate must be positive");
  double f = dp.A / (4.0 * std::numbers::sqrt2);
  double delta = dp.b / (4.0 * std::cbrt(dp.eps * dp.eps));
  return Params(f, delta);
}

EnvelopeState polar_to_complex(const PolarState& s) {
  return {s.time, std::polar(s.R, s.phi)};
}

double unwrap_near(double angle, double reference) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return angle - two_pi * std::round((angle - reference) / two_pi);
}

PolarState complex_to_polar(const EnvelopeState& s, std::optional<double> prev_phi,
                            bool carry_phase) {
  double R = std::abs(s.psi);
  if (R == 0.0) {
    if (carry_phase && prev_phi) return {s.time, 0.0, *prev_phi};
    throw DomainError("phase undefined for zero envelope");
  }
  double phi = std::arg(s.psi);
  if (prev_phi) phi = unwrap_near(phi, *prev_phi);
  return {s.time, R, phi};
}

std::string to_string(Scale s) {
  switch (s) {
  case Scale::Tau: return "tau";
  case Scale::Theta: return "theta";
  case Scale::Eta: return "eta";
  case Scale::InnerTau: return "inner_tau";
  case Scale::Xi: return "xi";
  }
  return "unknown";
}

Scale scale_from_string(const std::string& name) {
  if (name == "tau") return Scale::Tau;
  if (name == "theta") return Scale::Theta;
  if (name == "eta") return Scale::Eta;
  if (name == "inner_tau") return Scale::InnerTau;
  if (name == "xi") return Scale::Xi;
  throw DomainError("unknown scale: " + name);
}

double to_theta(double time, Scale from, const ScaleFrame& frame) {
  const double f2 = frame.params.f() * frame.params.f();
  const double d = frame.params.delta();
  switch (from) {
  case Scale::Tau: return time * d * d;
  case Scale::Theta: return time;
  case Scale::Eta: return f2 + d * time;
  case Scale::InnerTau: return f2 - d + d * d * time;
  case Scale::Xi: return f2 - d + d * d * frame.inner_pole + std::pow(d, 2.5) * time;
  }
  throw DomainError("unknown scale");
}

double from_theta(double theta, Scale to, const ScaleFrame& frame) {
  const double f2 = frame.params.f() * frame.params.f();
  const double d = frame.params.delta();
  switch (to) {
  case Scale::Tau: return theta / (d * d);
  case Scale::Theta: return theta;
  case Scale::Eta: return (theta - f2) / d;
  case Scale::InnerTau: return ((theta - f2) / d + 1.0) / d;
  case Scale::Xi: return (theta - f2 + d - d * d * frame.inner_pole) / std::pow(d, 2.5);
  }
  throw DomainError("unknown scale");
}

EnvelopeState convert_scale(const EnvelopeState& state, Scale from, Scale to,
                            const ScaleFrame& frame) {
  if (from == to) return state;
  const double d = frame.params.delta();
  if (!(d > 0.0)) throw DomainError("scale conversion needs delta > 0");
  std::complex<double> psi = state.psi;
  if (from == Scale::Tau) psi *= d;
  if (to == Scale::Tau) psi /= d;
  return {from_theta(to_theta(state.time, from, frame), to, frame), psi};
}

namespace {

constexpr double kLockPhase = 1.5 * std::numbers::pi;

double inner_shift(double tau, const Params& p) {
  const double f = p.f();
  return -1.0 / (2.0 * f) + p.delta() * (4.0 * f * f * tau - 1.0) / (8.0 * f * f * f);
}

} // namespace

IntermediateVars to_intermediate(double theta, double R, double phi, const Params& p) {
  const double d = p.delta();
  return {(theta - p.f() * p.f()) / d, (R - p.f()) / d, (phi - kLockPhase) / std::sqrt(d)};
}

PolarState from_intermediate(const IntermediateVars& v, const Params& p) {
  const double d = p.delta();
  return {p.f() * p.f() + d * v.eta, p.f() + d * v.r, kLockPhase + std::sqrt(d) * v.a};
}

InnerVars to_inner(double theta, double R, double phi, const Params& p) {
  const double d = p.delta();
  const double tau = ((theta - p.f() * p.f()) / d + 1.0) / d;
  const double r = (R - p.f()) / d;
  return {tau, (phi - kLockPhase) / d, (r - inner_shift(tau, p)) / (d * d)};
}

PolarState from_inner(const InnerVars& v, const Params& p) {
  const double d = p.delta();
  const double r = inner_shift(v.tau, p) + d * d * v.v;
  return {p.f() * p.f() - d + d * d * v.tau, p.f() + d * r, kLockPhase + d * v.u};
}

FastVars to_fast(double theta, double R, double phi, const ScaleFrame& frame) {
  const Params& p = frame.params;
  const double d = p.delta();
  const double base = p.f() + d * inner_shift(frame.inner_pole, p);
  return {from_theta(theta, Scale::Xi, frame), (R - base) / std::pow(d, 1.5), phi - kLockPhase};
}

PolarState from_fast(const FastVars& v, const ScaleFrame& frame) {
  const Params& p = frame.params;
  const double d = p.delta();
  const double base = p.f() + d * inner_shift(frame.inner_pole, p);
  return {to_theta(v.xi, Scale::Xi, frame), base + std::pow(d, 1.5) * v.p, kLockPhase + v.s};
}

} // namespace autores
