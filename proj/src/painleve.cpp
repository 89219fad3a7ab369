#include "autores/painleve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace autores {

namespace {

// Coefficients of y = ±√(x/6)(1 + Σ c_k x^{−5k/2}), x = −z.
const std::array<double, 4> kSeedCoeffs = {
    std::sqrt(6.0) / 48.0,
    -49.0 / 768.0,
    1225.0 * std::sqrt(6.0) / 9216.0,
    -4412401.0 / 1179648.0,
};

VectorField p1_field() {
  return [](double z, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = 6.0 * y[0] * y[0] + z;
  };
}

struct LineFit {
  double intercept = 0.0, slope = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

struct PoleFit {
  double z0 = 0.0, order = 0.0;
};

PoleFit fit_pole(const Painleve1Solution& sol) {
  if (!sol.blew_up) throw DomainError("no blow-up found in the integration range");
  const Trajectory& tr = sol.traj;
  const std::size_t last = tr.size() - 1;
  const double zb = tr.time(last);
  const double yb = tr.value(last, 0);
  if (!(yb > 1e3)) throw DomainError("solution did not reach the pole region");

  // Earliest sample of the final monotone climb with y above y_lo.
  auto start_of = [&](double y_lo) {
    std::size_t i = last;
    while (i > 0 && tr.value(i - 1, 0) >= y_lo && tr.value(i - 1, 0) < tr.value(i, 0)) --i;
    return tr.time(i);
  };

  constexpr int kPoints = 64;
  const double y_lin = std::min(1e4, yb / 100.0);
  const double za = start_of(y_lin);
  std::vector<double> zs, ws;
  for (int k = 0; k <= kPoints; ++k) {
    const double z = za + (zb - za) * k / kPoints;
    zs.push_back(z);
    ws.push_back(1.0 / std::sqrt(sol.y(z)));
  }
  const LineFit lf = fit_line(zs, ws);
  PoleFit out;
  out.z0 = -lf.intercept / lf.slope;

  const double zc = start_of(std::min(1e2, yb / 1e3));
  std::vector<double> lx, ly;
  for (int k = 0; k <= kPoints; ++k) {
    // Geometric spacing in the distance to the pole.
    const double d0 = out.z0 - zc, d1 = out.z0 - zb;
    const double d = d0 * std::pow(d1 / d0, static_cast<double>(k) / kPoints);
    const double z = out.z0 - d;
    if (z < zc || z > zb) continue;
    lx.push_back(std::log(d));
    ly.push_back(std::log(sol.y(z)));
  }
  out.order = fit_line(lx, ly).slope;
  return out;
}

} // namespace

std::string to_string(P1Branch b) { return b == P1Branch::Negative ? "negative" : "positive"; }

std::pair<double, double> seed_asymptotic(double z, const SeedOptions& opt) {
  if (!std::isfinite(z)) throw DomainError("seed abscissa must be finite");
  if (z > -opt.z_min) throw DomainError("z too close to the origin for asymptotic seeding");
  if (opt.terms < 0 || opt.terms > 4) throw DomainError("seed supports 0..4 correction terms");
  const double x = -z;
  double s = 1.0, ds = 0.0;
  for (int k = 0; k < opt.terms; ++k) {
    const double e = -2.5 * (k + 1);
    s += kSeedCoeffs[k] * std::pow(x, e);
    ds += kSeedCoeffs[k] * e * std::pow(x, e - 1.0);
  }
  const double sign = opt.branch == P1Branch::Negative ? -1.0 : 1.0;
  const double y = sign * std::sqrt(x / 6.0) * s;
  const double dydx = sign * (s / (2.0 * std::sqrt(6.0 * x)) + std::sqrt(x / 6.0) * ds);
  return {y, -dydx};
}

IntegratorConfig p1_default_config() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.blowup_norm = 1e10;
  return cfg;
}

Painleve1Solution solve_p1(double z_start, double z_end, const IntegratorConfig& cfg,
                           const SeedOptions& seed) {
  if (!(z_start < z_end)) throw DomainError("P1 range must satisfy z_start < z_end");
  const auto [y0, yp0] = seed_asymptotic(z_start, seed);
  std::vector<double> init{y0, yp0};
  Painleve1Solution sol;
  sol.traj = integrate(p1_field(), init, z_start, z_end, cfg);
  sol.z_seed = z_start;
  sol.z_end = z_end;
  sol.seed = seed;
  sol.cfg = cfg;
  sol.blew_up = sol.traj.status == TrajectoryStatus::BlowUp;
  return sol;
}

PoleEstimate locate_first_pole(const Painleve1Solution& sol) {
  PoleEstimate est;
  const PoleFit coarse = fit_pole(sol);
  IntegratorConfig tight = sol.cfg;
  tight.rel_tol /= 100.0;
  tight.abs_tol /= 100.0;
  const Painleve1Solution fine = solve_p1(sol.z_seed, sol.z_end, tight, sol.seed);
  const PoleFit refined = fit_pole(fine);
  est.z0_coarse = coarse.z0;
  est.z0_refined = refined.z0;
  est.z0 = refined.z0;
  est.z0_err = std::abs(refined.z0 - coarse.z0);
  est.order = refined.order;
  return est;
}

Painleve1Solution first_pole_solution(double z_seed, const IntegratorConfig& cfg,
                                      const SeedOptions& seed) {
  Painleve1Solution sol = solve_p1(z_seed, 20.0, cfg, seed);
  const PoleEstimate est = locate_first_pole(sol);
  sol.z0 = est.z0;
  sol.z0_err = est.z0_err;
  sol.pole_order = est.order;
  return sol;
}

double p1_defect(const Painleve1Solution& sol, bool midpoints) {
  const Trajectory& tr = sol.traj;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const double z = midpoints ? 0.5 * (tr.time(i) + tr.time(i + 1)) : tr.time(i);
    const double ypp = dense_derivative(tr, z)[1];
    const double y = dense_eval(tr, z)[0];
    const double scale = std::max(1.0, 6.0 * y * y + std::abs(z));
    worst = std::max(worst, std::abs(ypp - 6.0 * y * y - z) / scale);
  }
  return worst;
}

double p1_time_scale(const Params& p) { return std::pow(6.0 / (p.f() * p.f()), 0.2); }

double p1_amplitude_scale(const Params& p) { return std::pow(p1_time_scale(p), 3.0); }

double inner_pole(const Params& p, double z0) {
  return p1_time_scale(p) * z0 - 1.0 / (4.0 * p.f() * p.f());
}

MatchCalibration calibrate_samples(const Params& p, const std::vector<double>& tau_inner,
                                   const std::vector<double>& u, const Painleve1Solution& sol,
                                   const CalibrationOptions& opt) {
  if (tau_inner.size() != u.size() || tau_inner.size() < 3)
    throw DomainError("calibration needs matching samples (at least 3)");
  const double f2 = p.f() * p.f();
  const double shift = 1.0 / (4.0 * f2);
  const double z_lo = sol.traj.t_front(), z_hi = sol.traj.t_back();

  auto y_at = [&](double tau, double z_scale, double& out) {
    const double z = (tau + shift) / z_scale;
    if (z < z_lo || z > z_hi) return false;
    out = sol.y(z);
    return true;
  };

  double norm_u = 0.0;
  for (double v : u) norm_u += v * v;
  norm_u = std::sqrt(norm_u / static_cast<double>(u.size()));

  auto rms_for = [&](double kappa, double z_scale) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double y;
      if (!y_at(tau_inner[i], z_scale, y)) return std::numeric_limits<double>::quiet_NaN();
      s += (u[i] - kappa * y) * (u[i] - kappa * y);
    }
    return std::sqrt(s / static_cast<double>(u.size())) / norm_u;
  };

  MatchCalibration cal;
  cal.mu = p1_time_scale(p);
  cal.threshold = opt.threshold;
  cal.q = opt.q;
  cal.points = u.size();
  cal.tau_lo = *std::min_element(tau_inner.begin(), tau_inner.end());
  cal.tau_hi = *std::max_element(tau_inner.begin(), tau_inner.end());

  double suy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double y;
    if (!y_at(tau_inner[i], cal.mu, y)) throw DomainError("calibration window leaves the P1 solution");
    suy += u[i] * y;
    syy += y * y;
  }
  cal.kappa = suy / syy;
  cal.sigma = cal.kappa < 0.0 ? -1 : 1;
  cal.rms_mismatch = rms_for(cal.kappa, cal.mu);
  cal.ok = cal.rms_mismatch < opt.threshold;

  const double printed_z = f2 / 6.0;
  cal.candidates = {
      {"derived (6/f^2)^(3/5)", p1_amplitude_scale(p), cal.mu, 0.0},
      {"printed 3^(3/5), printed z-map", std::pow(3.0, 0.6), printed_z, 0.0},
      {"printed (f^2/6)^(1/3), printed z-map", std::cbrt(f2 / 6.0), printed_z, 0.0},
      {"printed 3^(3/5), derived z-map", std::pow(3.0, 0.6), cal.mu, 0.0},
      {"printed (f^2/6)^(1/3), derived z-map", std::cbrt(f2 / 6.0), cal.mu, 0.0},
  };
  for (CandidateFit& c : cal.candidates) c.rms = rms_for(c.kappa, c.z_scale);
  return cal;
}

MatchCalibration calibrate(const Params& p, const Trajectory& capture, const Painleve1Solution& sol,
                           const CalibrationOptions& opt) {
  if (sol.z0 == 0.0) throw DomainError("P1 solution has no located pole");
  const double d = p.delta();
  const double tau0 = inner_pole(p, sol.z0);
  const double lo = tau0 + opt.window_lo;
  const double hi = tau0 - opt.window_gap * std::sqrt(d);
  if (!(lo < hi)) throw DomainError("empty calibration window");
  const double lock = 1.5 * std::numbers::pi;
  std::vector<double> taus, us;
  for (std::size_t k = 0; k < opt.points; ++k) {
    const double t_in = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(opt.points - 1);
    const double theta = p.f() * p.f() - d + d * d * t_in;
    const auto psi = dense_eval(capture, theta / (d * d));
    const double phi = unwrap_near(std::atan2(psi[1], psi[0]), lock);
    taus.push_back(t_in);
    us.push_back((phi - lock) / d);
  }
  return calibrate_samples(p, taus, us, sol, opt);
}

} // namespace autores
