#include "autores/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace autores {

namespace {

constexpr double kLockPhase = 1.5 * std::numbers::pi;

double branch_sign(OuterBranch b) { return b == OuterBranch::Attracting ? -1.0 : 1.0; }

// Richardson-extrapolated central difference.
template <class F>
auto derivative(const F& g, double x, double h) {
  const auto d1 = (g(x + h) - g(x - h)) / (2.0 * h);
  const auto d2 = (g(x + 0.5 * h) - g(x - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

} // namespace

std::string to_string(OuterBranch b) { return b == OuterBranch::Attracting ? "attracting" : "repelling"; }

OuterSeries::OuterSeries(const Params& p, OuterOptions opt) : p_(p), opt_(opt) {
  if (opt_.k_max < 0 || opt_.k_max > 3) throw DomainError("outer series order must be 0..3");
  if (opt_.k_max == 3 && !opt_.third_order)
    throw DomainError("third-order outer terms are opt-in");
  if (!(opt_.validity > 0.0)) throw DomainError("validity threshold must be positive");
}

bool OuterSeries::in_domain(double theta) const {
  const double f2 = p_.f() * p_.f();
  return theta > 0.0 && theta < f2 && p_.delta() / (f2 - theta) < opt_.validity;
}

void OuterSeries::check(double theta) const {
  if (!in_domain(theta)) throw DomainError("theta outside the outer validity domain");
}

OuterCoefficients OuterSeries::coefficients(double theta) const {
  const double f = p_.f(), f2 = f * f;
  if (!(theta > 0.0 && theta < f2)) throw DomainError("outer coefficients need 0 < theta < f^2");
  const double sg = branch_sign(opt_.branch);
  const double sg3 = sg * sg * sg, sg5 = sg3 * sg * sg;
  const double S = std::sqrt(theta), D = std::sqrt(f2 - theta);
  const double D3 = D * D * D, D5 = D3 * D * D, D7 = D5 * D * D;
  OuterCoefficients c;
  c.alpha[0] = std::atan2(-S / f, sg * D / f);
  c.rho[0] = -sg * D / (2.0 * theta);
  c.alpha[1] = -1.0 / (2.0 * sg * S * D);
  c.rho[1] = 1.0 / (2.0 * sg * theta * D);
  c.alpha[2] = -1.0 / (8.0 * sg3 * S * D3);
  c.rho[2] = (4.0 * theta - f2) / (16.0 * sg3 * theta * theta * D3);
  c.alpha[3] = -f2 / (16.0 * sg5 * S * D7) + 1.0 / (2.0 * theta) -
               1.0 / (48.0 * sg3 * theta * S * D3) + S / (16.0 * sg5 * D7);
  c.rho[3] = -3.0 * f2 / (8.0 * theta * theta * S) + f2 / (32.0 * sg5 * theta * D7) +
             1.0 / (8.0 * theta * S) + 3.0 / (32.0 * sg3 * theta * D5) - 1.0 / (32.0 * sg5 * D7);
  if (opt_.third_order_form == ThirdOrderForm::Printed) {
    c.alpha[3] = -c.alpha[3];
    c.rho[3] = -c.rho[3];
  }
  return c;
}

double OuterSeries::rho(double theta) const {
  const OuterCoefficients c = coefficients(theta);
  double s = 0.0, dk = 1.0;
  for (int k = 0; k <= opt_.k_max; ++k, dk *= p_.delta()) s += dk * c.rho[k];
  return s;
}

double OuterSeries::alpha(double theta) const {
  const OuterCoefficients c = coefficients(theta);
  double s = 0.0, dk = 1.0;
  for (int k = 0; k <= opt_.k_max; ++k, dk *= p_.delta()) s += dk * c.alpha[k];
  return s;
}

PolarState OuterSeries::evaluate(double theta) const {
  check(theta);
  const double d = p_.delta();
  return {theta, std::sqrt(theta) + d * d * d * rho(theta), alpha(theta)};
}

std::pair<double, double> OuterSeries::truncation_error(double theta) const {
  check(theta);
  const OuterCoefficients c = coefficients(theta);
  const double d = p_.delta();
  const int k = opt_.k_max;
  if (k < 3) {
    const double dk = std::pow(d, k + 1);
    return {d * d * d * dk * std::abs(c.rho[k + 1]), dk * std::abs(c.alpha[k + 1])};
  }
  // No fourth-order terms: scale the last one by the expansion ratio.
  const double ratio = d / (p_.f() * p_.f() - theta);
  return {d * d * d * std::pow(d, 3) * std::abs(c.rho[3]) * ratio,
          std::pow(d, 3) * std::abs(c.alpha[3]) * ratio};
}

PolarState outer_solution(double theta, const Params& p, int k_max, OuterOptions opt) {
  opt.k_max = k_max;
  if (k_max == 3) opt.third_order = true;
  return OuterSeries(p, opt).evaluate(theta);
}

double outer_residual(const OuterSeries& s, double theta) {
  const Params& p = s.params();
  const double d = p.delta(), d3 = d * d * d;
  auto psi = [&](double th) {
    return std::polar(std::sqrt(th) + d3 * s.rho(th), s.alpha(th));
  };
  const double h = 1e-3 * std::min(theta, p.f() * p.f() - theta);
  const std::complex<double> dpsi = derivative(psi, theta, h);
  const double rho = s.rho(theta);
  const std::complex<double> z = psi(theta);
  const double detune = -d3 * rho * (2.0 * std::sqrt(theta) + d3 * rho); // θ − |ψ|²
  const std::complex<double> I(0.0, 1.0);
  const std::complex<double> res = I * (d3 * d) * dpsi + detune * z + I * d3 * z - d3 * p.f();
  return std::abs(res);
}

double outer_residual_order(double f, double theta, double delta1, double delta2, OuterOptions opt) {
  const double r1 = outer_residual(OuterSeries(Params(f, delta1), opt), theta);
  const double r2 = outer_residual(OuterSeries(Params(f, delta2), opt), theta);
  return std::log(r1 / r2) / std::log(delta1 / delta2);
}

IntermediateSeries::IntermediateSeries(const Params& p, IntermediateOptions opt) : p_(p), opt_(opt) {
  if (opt_.k_max < 0 || opt_.k_max > 2) throw DomainError("intermediate series order must be 0..2");
  if (opt_.q != 1 && opt_.q != 2) throw DomainError("q must be 1 or 2");
  if (opt_.sigma != 1 && opt_.sigma != -1) throw DomainError("sigma must be +1 or -1");
  if (!(opt_.validity > 0.0)) throw DomainError("validity threshold must be positive");
}

bool IntermediateSeries::in_domain(double eta) const {
  return eta < -1.0 && p_.delta() / (-1.0 - eta) < opt_.validity;
}

IntermediateValue IntermediateSeries::evaluate(double eta) const {
  if (!in_domain(eta)) throw DomainError("eta outside the intermediate validity domain");
  const double f = p_.f(), f3 = f * f * f, f5 = f3 * f * f;
  const double d = p_.delta();
  const double sg = opt_.sigma;
  const double m = -1.0 - eta;
  const double W = std::sqrt(m);
  IntermediateValue v;
  v.eta = eta;
  v.r = eta / (2.0 * f);
  v.a = sg * std::sqrt(m / std::pow(f, opt_.q));
  if (opt_.k_max >= 1) {
    v.r += -d * eta * eta / (8.0 * f3);
    v.a += d * sg * (4.0 * eta * eta + 8.0 * eta + 1.0) / (24.0 * f3 * W);
  }
  if (opt_.k_max >= 2) {
    const double e2 = eta * eta;
    v.r += d * d * eta * e2 / (16.0 * f5);
    v.a += d * d * (48.0 * e2 * e2 + 192.0 * e2 * eta + 168.0 * e2 + 32.0 * eta + 3.0) /
           (640.0 * f5 * sg * m * W);
  }
  return v;
}

PolarState IntermediateSeries::polar(double eta) const {
  const IntermediateValue v = evaluate(eta);
  return from_intermediate({v.eta, v.r, v.a}, p_);
}

IntermediateValue intermediate_solution(double eta, const Params& p, int k_max,
                                        IntermediateOptions opt) {
  opt.k_max = k_max;
  return IntermediateSeries(p, opt).evaluate(eta);
}

double intermediate_residual(const IntermediateSeries& s, double eta) {
  const Params& p = s.params();
  const double d = p.delta(), f = p.f();
  const IntermediateValue v = s.evaluate(eta);
  const double h = 1e-3 * std::min(1.0, -1.0 - eta);
  const double dr = derivative([&](double e) { return s.evaluate(e).r; }, eta, h);
  // δR_θ + R + f sin φ with R_θ = r'(η) and 1 + sin(3π/2 + x) = 2 sin²(x/2).
  const double half = 0.5 * std::sqrt(d) * v.a;
  return std::abs(d * dr + d * v.r + 2.0 * f * std::sin(half) * std::sin(half));
}

BranchChoice select_intermediate_branch(const Params& p, double theta_lo, double theta_hi,
                                        std::size_t points) {
  const double f2 = p.f() * p.f(), d = p.delta();
  if (!(0.0 < theta_lo && theta_lo < theta_hi && theta_hi < f2 - d))
    throw DomainError("branch selection window must satisfy 0 < lo < hi < f^2 - delta");
  if (points < 2) throw DomainError("need at least two points");
  OuterOptions oo;
  OuterSeries outer(p, oo);
  const int qs[] = {1, 1, 2, 2};
  const int ss[] = {1, -1, 1, -1};
  BranchChoice out;
  out.theta_lo = theta_lo;
  out.theta_hi = theta_hi;
  std::array<double, 4> acc{};
  for (std::size_t i = 0; i < points; ++i) {
    const double th = theta_lo + (theta_hi - theta_lo) * static_cast<double>(i) /
                                     static_cast<double>(points - 1);
    const double eta = (th - f2) / d;
    const double a_out = (unwrap_near(outer.alpha(th), kLockPhase) - kLockPhase) / std::sqrt(d);
    for (int c = 0; c < 4; ++c) {
      const double a0 = ss[c] * std::sqrt((-1.0 - eta) / std::pow(p.f(), qs[c]));
      acc[c] += (a0 - a_out) * (a0 - a_out);
    }
  }
  int best = 3; // ties go to the derived branch
  for (int c : {2, 1, 0}) {
    if (acc[c] < acc[best] * (1.0 - 1e-9)) best = c;
  }
  for (int c = 0; c < 4; ++c) out.rms[c] = std::sqrt(acc[c] / static_cast<double>(points));
  out.q = qs[best];
  out.sigma = ss[best];
  return out;
}

Prediction predict(const Params& p, double z0) {
  if (!std::isfinite(z0)) throw DomainError("z0 must be finite");
  const double f = p.f(), f2 = f * f, d = p.delta();
  Prediction pr;
  pr.z0_used = z0;
  pr.tau0 = inner_pole(p, z0);
  if (d * pr.tau0 >= 1.0) throw DomainError("delta too large for the break asymptotics");
  pr.theta_star = f2 - d + d * d * pr.tau0;
  pr.tau_star = f2 / (d * d);
  pr.tau_star_refined = pr.theta_star / (d * d);
  pr.R_star_psi = f - d / (2.0 * f);
  pr.R_star_Psi = pr.R_star_psi / d;
  pr.theta_star_printed_scale = f2 - d + d * d * (f2 * z0 / 6.0 - 1.0 / (4.0 * f2));
  return pr;
}

std::pair<std::complex<double>, std::complex<double>> wkb_eigenvalues(double theta, const Params& p) {
  const double f2 = p.f() * p.f(), d = p.delta();
  if (!(theta > 0.0 && theta < f2)) throw DomainError("WKB eigenvalues need 0 < theta < f^2");
  const double im = std::sqrt(2.0) * std::pow((f2 - theta) * theta, 0.25) * std::sqrt(d);
  return {{-d / 2.0, im}, {-d / 2.0, -im}};
}

std::pair<std::complex<double>, std::complex<double>> linearized_eigenvalues(double theta,
                                                                             const Params& p) {
  const double f = p.f(), f2 = f * f, d = p.delta();
  if (!(theta > 0.0 && theta < f2)) throw DomainError("linearization needs 0 < theta < f^2");
  const double R = std::sqrt(theta) / d;
  const double cphi = -std::sqrt(f2 - theta) / f, sphi = -std::sqrt(theta) / f;
  const double j11 = -d, j12 = -f * cphi;
  const double j21 = -2.0 * R + f * cphi / (R * R), j22 = f * sphi / R;
  const double tr = j11 + j22, det = j11 * j22 - j12 * j21;
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
  return {d * (tr / 2.0 + disc), d * (tr / 2.0 - disc)};
}

double lock_frequency(double theta, const Params& p) {
  return std::abs(linearized_eigenvalues(theta, p).first.imag()) / p.delta();
}

InnerValue painleve_region_solution(double tau_inner, const Params& p, const MatchCalibration& calib,
                                    const Painleve1Solution& sol, double validity) {
  if (sol.z0 == 0.0) throw DomainError("P1 solution has no located pole");
  const double f = p.f(), f2 = f * f;
  const double tau0 = inner_pole(p, sol.z0);
  if (!(tau_inner < tau0) || std::sqrt(p.delta()) / (tau0 - tau_inner) >= validity)
    throw DomainError("inner time too close to the pole");
  const double z = (tau_inner + 1.0 / (4.0 * f2)) / calib.mu;
  if (z < sol.traj.t_front() || z > sol.traj.t_back())
    throw DomainError("inner time outside the P1 solution range");
  const auto y = dense_eval(sol.traj, z);
  InnerValue v;
  v.tau = tau_inner;
  v.u = calib.kappa * y[0];
  const double du = calib.kappa * y[1] / calib.mu;
  v.v = ((tau_inner - 1.0 / (4.0 * f2)) / (2.0 * f2) - du) / (2.0 * f);
  return v;
}

} // namespace autores
