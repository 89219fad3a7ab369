#include "autores/harness.hpp"

#include "autores/model.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>

namespace autores {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLockPhase = 1.5 * std::numbers::pi;

double modulus(const Trajectory& tr, std::size_t i) { return std::hypot(tr.value(i, 0), tr.value(i, 1)); }

// Linear interpolation of a tabulated function at x (xs increasing).
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}

// Root of g on [a, b] with g(a) < 0 ≤ g(b), by bisection.
template <class G>
double bisect(const G& g, double a, double b) {
  for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    if (g(m) < 0.0) a = m;
    else b = m;
  }
  return b;
}

} // namespace

IntegratorConfig capture_config() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.max_step = 0.25;
  return cfg;
}

Trajectory simulate_capture(const Params& p, std::complex<double> psi0, double tau_max,
                            const IntegratorConfig& cfg, double tau_start) {
  if (!(tau_max > tau_start)) throw DomainError("tau_max must exceed the start time");
  std::vector<double> y0{psi0.real(), psi0.imag()};
  return integrate(vector_field(ModelSystem::ComplexPR, p), y0, tau_start, tau_max, cfg);
}

double local_period(double tau, const Params& p) {
  const double f = p.f(), d = p.delta();
  const double tc = std::max(tau, 1.0);
  const double x = std::max(1.0 - d * d * tc / (f * f), d / (f * f));
  const double omega = std::sqrt(2.0 * f) * std::pow(tc, 0.25) * std::pow(x, 0.25);
  return kTwoPi / omega;
}

BreakReport detect_break(const Trajectory& traj, const Params& p, const BreakOptions& opt) {
  if (traj.size() < 3 || traj.dim() != 2) throw DomainError("break detection needs a complex-form trajectory");
  const std::size_t n = traj.size();
  std::vector<double> ts(n), R(n), L(n), I(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = traj.time(i);
    R[i] = modulus(traj, i);
    L[i] = ts[i] > 0.0 ? std::abs(R[i] - std::sqrt(ts[i])) / std::sqrt(ts[i]) : 1.0;
    if (i > 0) I[i] = I[i - 1] + 0.5 * (L[i] + L[i - 1]) * (ts[i] - ts[i - 1]);
  }
  std::vector<double> S(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::min(opt.max_window, opt.window_periods * local_period(ts[i], p));
    const double a = std::max(ts.front(), ts[i] - 0.5 * w);
    const double b = std::min(ts.back(), ts[i] + 0.5 * w);
    S[i] = b > a ? (interp(ts, I, b) - interp(ts, I, a)) / (b - a) : L[i];
  }

  BreakReport rep;
  std::size_t last_lock = n;
  for (std::size_t i = n; i-- > 0;) {
    if (S[i] <= opt.kappa_break) {
      last_lock = i;
      break;
    }
  }
  rep.stages.captured = last_lock < n;
  if (!rep.stages.captured || last_lock == n - 1) {
    rep.broke = false;
    rep.tau_lower_bound = ts.back();
    std::size_t imax = static_cast<std::size_t>(std::max_element(R.begin(), R.end()) - R.begin());
    rep.R_max_measured = R[imax];
    rep.tau_R_max = ts[imax];
    if (rep.stages.captured) {
      std::size_t j = last_lock;
      while (j > 0 && S[j - 1] <= opt.kappa_break) --j;
      rep.stages.tau_lock = ts[j];
    }
    return rep;
  }
  rep.broke = true;
  {
    const std::size_t i = last_lock;
    const double w = (opt.kappa_break - S[i]) / (S[i + 1] - S[i]);
    rep.tau_break_coarse = ts[i] + w * (ts[i + 1] - ts[i]);
  }
  // Lock begins after the last raw excursion above κ in the first half of the run.
  std::size_t lock_start = 0;
  for (std::size_t i = 0; i < n && ts[i] < 0.5 * rep.tau_break_coarse; ++i) {
    if (L[i] > opt.kappa_break) lock_start = std::min(i + 1, n - 1);
  }
  rep.stages.tau_lock = ts[lock_start];

  std::size_t imax = 0;
  for (std::size_t i = 0; i < n && ts[i] <= rep.tau_break_coarse; ++i) {
    if (R[i] > R[imax]) imax = i;
  }
  rep.R_max_measured = R[imax];
  rep.tau_R_max = ts[imax];

  rep.tau_break_measured = rep.tau_break_coarse;
  for (std::size_t i = imax; i + 1 < n; ++i) {
    if (traj.value(i, 1) < 0.0 && traj.value(i + 1, 1) >= 0.0) {
      rep.tau_break_measured =
          bisect([&](double t) { return dense_eval(traj, t)[1]; }, ts[i], ts[i + 1]);
      break;
    }
  }
  const double d = p.delta();
  rep.theta_break_measured = rep.tau_break_measured * d * d;

  // Post-break stage: time-averaged amplitude and phase advance.
  const double t_post = rep.tau_break_measured + 2.0 * local_period(rep.tau_break_measured, p);
  double area = 0.0, span = 0.0, phi = 0.0, phi0 = 0.0;
  bool started = false;
  for (std::size_t i = 1; i < n; ++i) {
    if (ts[i - 1] < t_post) continue;
    const double ph = std::atan2(traj.value(i, 1), traj.value(i, 0));
    if (!started) {
      phi0 = phi = std::atan2(traj.value(i - 1, 1), traj.value(i - 1, 0));
      started = true;
    }
    phi = unwrap_near(ph, phi);
    area += 0.5 * (R[i] + R[i - 1]) * (ts[i] - ts[i - 1]);
    span += ts[i] - ts[i - 1];
  }
  if (span > 0.0) {
    rep.stages.post_break_mean_R = area / span;
    rep.stages.post_break_phase_turns = (phi - phi0) / kTwoPi;
    rep.stages.fast_after_break = rep.stages.post_break_mean_R < 0.5 * rep.R_max_measured &&
                                  rep.stages.post_break_phase_turns > 3.0;
  }
  rep.stages.tracked = rep.tau_break_coarse - rep.stages.tau_lock > 0.5 * rep.tau_break_coarse;
  rep.stages.three_stages = rep.stages.captured && rep.stages.tau_lock > ts.front() &&
                            rep.stages.tracked && rep.stages.fast_after_break;
  return rep;
}

void attach_prediction(BreakReport& r, const Params& p, double z0) {
  r.prediction = predict(p, z0);
  r.has_prediction = true;
  if (r.broke) {
    r.rel_err_theta = std::abs(r.theta_break_measured - r.prediction.theta_star) / r.prediction.theta_star;
  }
  r.rel_err_Rmax = std::abs(r.R_max_measured - r.prediction.R_star_Psi) / r.prediction.R_star_Psi;
}

BreakReport capture_break_report(const Params& p, double z0, double tau_margin,
                                 const IntegratorConfig& cfg, const BreakOptions& opt) {
  if (!(tau_margin > 0.0)) throw DomainError("tau_margin must be positive");
  const Prediction pr = predict(p, z0);
  const Trajectory tr = simulate_capture(p, {0.0, 0.0}, pr.tau_star_refined + tau_margin, cfg);
  BreakReport r = detect_break(tr, p, opt);
  attach_prediction(r, p, z0);
  return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs two or more points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]) - mx;
    sxx += lx * lx;
    sxy += lx * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

SweepResult convergence_sweep(double f, const std::vector<double>& deltas, double tau_margin,
                              double z0, const IntegratorConfig& cfg) {
  if (deltas.size() < 3) throw DomainError("sweep needs at least three delta values");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] < 0.2 * f)) throw DomainError("sweep deltas must lie in (0, 0.2 f)");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw DomainError("sweep deltas must be strictly decreasing");
  }
  std::vector<std::future<BreakReport>> jobs;
  for (double d : deltas) {
    jobs.push_back(std::async(std::launch::async, [=] {
      return capture_break_report(Params(f, d), z0, tau_margin, cfg);
    }));
  }
  SweepResult res;
  res.f = f;
  res.z0 = z0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    BreakReport r = jobs[i].get();
    if (!r.broke) {
      res.warnings.push_back("no break detected for delta=" + std::to_string(deltas[i]));
      continue;
    }
    SweepEntry e;
    e.delta = deltas[i];
    e.err_refined = std::abs(r.theta_break_measured - r.prediction.theta_star);
    e.err_crude = std::abs(r.theta_break_measured - f * f);
    e.err_printed = std::abs(r.theta_break_measured - r.prediction.theta_star_printed_scale);
    e.report = std::move(r);
    res.entries.push_back(std::move(e));
  }
  if (res.entries.size() < 3) throw DomainError("fewer than three sweep runs produced a break");
  std::vector<double> ds, er, ec;
  res.monotone = true;
  res.refined_beats_crude = true;
  for (std::size_t i = 0; i < res.entries.size(); ++i) {
    const SweepEntry& e = res.entries[i];
    ds.push_back(e.delta);
    er.push_back(e.err_refined);
    ec.push_back(e.err_crude);
    if (i > 0 && !(e.err_refined < res.entries[i - 1].err_refined)) res.monotone = false;
    if (!(e.err_refined < e.err_crude)) res.refined_beats_crude = false;
  }
  res.fitted_order = loglog_slope(ds, er);
  res.fitted_order_crude = loglog_slope(ds, ec);
  return res;
}

StabilityReport stability_experiment(const Params& p, double theta_lo, double theta_hi,
                                     double perturbation, const StabilityOptions& opt) {
  if (!(theta_lo < theta_hi)) throw DomainError("stability window must be nonempty");
  if (!(perturbation >= 0.0)) throw DomainError("perturbation must be nonnegative");
  OuterOptions oo;
  oo.k_max = opt.k_max;
  oo.validity = opt.validity;
  const OuterSeries outer(p, oo);
  if (!outer.in_domain(theta_lo) || !outer.in_domain(theta_hi))
    throw DomainError("stability window leaves the outer validity domain");
  const double d = p.delta();

  StabilityReport rep;
  rep.f = p.f();
  rep.delta = d;
  rep.perturbation = perturbation;
  rep.theta_lo = theta_lo;
  rep.theta_hi = theta_hi;
  const double th_mid = 0.5 * (theta_lo + theta_hi);
  rep.linearized_rate = linearized_eigenvalues(th_mid, p).first.real() / d;
  rep.wkb_real_part = wkb_eigenvalues(th_mid, p).first.real() / d;
  // The start sits on the truncated curve, off the invariant one by the
  // truncation error there; the distance is bounded by that plus the local one.
  auto trunc = [&](double th) {
    const auto [eR, ePhi] = outer.truncation_error(th);
    return eR / outer.evaluate(th).R + ePhi;
  };
  for (int k = 0; k <= 16; ++k) rep.floor = std::max(rep.floor, trunc(theta_lo + (theta_hi - theta_lo) * k / 16.0));
  rep.floor += trunc(theta_lo) + 10.0 * opt.cfg.rel_tol;

  // Evenly spaced directions behind a seeded random offset.
  std::mt19937_64 rng(opt.seed);
  const double offset = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  const int runs = perturbation == 0.0 || opt.zero_data ? 1 : std::max(1, opt.directions);
  std::vector<double> betas;
  for (int j = 0; j < runs; ++j) betas.push_back(std::fmod(offset + kTwoPi * j / runs, kTwoPi));

  auto run_one = [&](double beta) {
    StabilityRun run;
    run.direction = beta;
    const PolarState s0 = outer.evaluate(theta_lo);
    const double R = s0.R * (1.0 + perturbation * std::cos(beta));
    const double phi = s0.phi + perturbation * std::sin(beta);
    const double t0 = theta_lo / (d * d), t1 = theta_hi / (d * d);
    // Loss of lock drops R far below the locked amplitude; stop there.
    const std::vector<Event> lost{Event::custom(
        "lost_lock",
        [](double t, std::span<const double> y) { return std::hypot(y[0], y[1]) / std::sqrt(t) - 0.5; },
        Direction::Falling, true)};
    std::vector<double> y0{std::polar(R / d, phi).real(), std::polar(R / d, phi).imag()};
    IntegratorConfig cfg = opt.cfg;
    cfg.max_steps = std::min<std::size_t>(cfg.max_steps, 5000000);
    Trajectory tr;
    try {
      if (opt.zero_data)
        tr = integrate(vector_field(ModelSystem::ComplexPR, p), std::vector<double>{0.0, 0.0}, 0.0, t1, cfg);
      else
        tr = integrate(vector_field(ModelSystem::ComplexPR, p), y0, t0, t1, cfg, lost);
    } catch (const MaxStepsExceeded&) {
      run.escaped = true;
      return run;
    }
    if (tr.t_back() < t1) {
      run.escaped = true;
      return run;
    }
    // Envelope of the relative distance: maximum over consecutive local periods.
    double t = t0;
    double total_periods = 0.0;
    std::vector<double> taus, envs;
    while (t < t1) {
      const double T = local_period(t, p);
      const double te = std::min(t1, t + T);
      double env = 0.0;
      for (int k = 0; k <= 32; ++k) {
        const double tk = t + (te - t) * k / 32.0;
        const double th = tk * d * d;
        const auto y = dense_eval(tr, tk);
        const PolarState o = outer.evaluate(th);
        const std::complex<double> num(d * y[0], d * y[1]);
        const double dist = std::abs(num - std::polar(o.R, o.phi)) / o.R;
        env = std::max(env, dist);
      }
      taus.push_back(0.5 * (t + te));
      envs.push_back(env);
      run.norm_series.emplace_back(0.5 * (t + te) * d * d, env);
      total_periods += (te - t) / T;
      t = te;
    }
    run.periods = total_periods;
    run.initial_norm = envs.front();
    run.final_norm = envs.back();
    // Cycle slips that relock are not escapes; a run is lost only if it ends away from the curve.
    run.escaped = run.final_norm > 0.5;
    run.decay_detected = !run.escaped && run.final_norm < 0.5 * run.initial_norm;
    // Fit the decay where the envelope stands clear of the asymptotic floor.
    std::vector<double> ft, fl;
    for (std::size_t i = 0; i < envs.size(); ++i) {
      if (envs[i] > 10.0 * rep.floor) {
        ft.push_back(taus[i]);
        fl.push_back(std::log(envs[i]));
      }
    }
    if (ft.size() < 3) {
      ft.assign(taus.begin(), taus.end());
      fl.clear();
      for (double e : envs) fl.push_back(std::log(e));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < ft.size(); ++i) {
      mx += ft[i];
      my += fl[i];
    }
    mx /= static_cast<double>(ft.size());
    my /= static_cast<double>(ft.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ft.size(); ++i) {
      sxx += (ft[i] - mx) * (ft[i] - mx);
      sxy += (ft[i] - mx) * (fl[i] - my);
    }
    run.fitted_decay_rate = sxy / sxx;
    return run;
  };

  std::vector<std::future<StabilityRun>> jobs;
  for (double b : betas) jobs.push_back(std::async(std::launch::async, run_one, b));
  rep.decay_detected = true;
  double rate = 0.0;
  int kept = 0;
  for (auto& j : jobs) {
    StabilityRun r = j.get();
    rep.decay_detected = rep.decay_detected && r.decay_detected;
    rep.escaped = rep.escaped || r.escaped;
    if (!r.escaped) {
      rate += r.fitted_decay_rate;
      ++kept;
    }
    rep.runs.push_back(std::move(r));
  }
  rep.fitted_decay_rate = kept > 0 ? rate / kept : std::numeric_limits<double>::quiet_NaN();
  rep.perturbation_norm_series = rep.runs.front().norm_series;
  return rep;
}

FastMotionReport fast_motion_transition(const Params& p, double z0, double shadow_window,
                                        double xi_after, const IntegratorConfig& cfg) {
  if (!(shadow_window > 0.0) || !(xi_after > shadow_window))
    throw DomainError("fast-motion window must satisfy 0 < shadow_window < xi_after");
  const Prediction pr = predict(p, z0);
  const double d = p.delta(), f = p.f();
  const ScaleFrame frame{p, pr.tau0};
  FastMotionReport rep;
  rep.f = f;
  rep.delta = d;
  rep.z0 = z0;
  rep.tau0 = pr.tau0;
  rep.coefficient_expected = 2.0 * f;

  const double tau_end = to_theta(xi_after, Scale::Xi, frame) / (d * d);
  const Trajectory tr = simulate_capture(p, {0.0, 0.0}, tau_end, cfg);
  if (tr.t_back() < tau_end) throw DomainError("capture run ended before the fast-motion window");

  const double xi_start = -3.0, dxi = 0.002;
  const std::size_t n = static_cast<std::size_t>(std::ceil((xi_after - xi_start) / dxi));
  std::vector<double> xs, ps, ss, dss;
  double phi_prev = kLockPhase;
  for (std::size_t k = 0; k <= n; ++k) {
    const double xi = std::min(xi_after, xi_start + dxi * static_cast<double>(k));
    const double tau = to_theta(xi, Scale::Xi, frame) / (d * d);
    const auto y = dense_eval(tr, tau);
    const double RPsi = std::hypot(y[0], y[1]);
    const double phi = unwrap_near(std::atan2(y[1], y[0]), phi_prev);
    phi_prev = phi;
    const FastVars fv = to_fast(tau * d * d, d * RPsi, phi, frame);
    const double dphi = tau - RPsi * RPsi - f * std::cos(phi) / RPsi;
    xs.push_back(xi);
    ps.push_back(fv.p);
    ss.push_back(fv.s);
    dss.push_back(std::sqrt(d) * dphi);
  }

  std::size_t km = 0;
  while (km + 1 < xs.size() && !(ss[km] < 0.5 * std::numbers::pi && ss[km + 1] >= 0.5 * std::numbers::pi)) ++km;
  if (km + 1 >= xs.size()) throw DomainError("no phase slip found in the fast-motion window");
  const double w = (0.5 * std::numbers::pi - ss[km]) / (ss[km + 1] - ss[km]);
  rep.xi_match = xs[km] + w * dxi;
  rep.p_match = ps[km] + w * (ps[km + 1] - ps[km]);
  rep.s_match = 0.5 * std::numbers::pi;
  rep.E0_match = fast_motion_energy({rep.p_match, rep.s_match});
  rep.xi_end = xs.back();
  rep.s_end = ss.back();
  rep.running_phase = rep.s_end - rep.s_match > kTwoPi;

  rep.s_monotone = true;
  for (std::size_t k = km + 1; k + 1 < xs.size() && ss[k] < rep.s_match + std::numbers::pi; ++k) {
    if (ss[k + 1] < ss[k]) rep.s_monotone = false;
  }

  Params pf = p;
  std::vector<double> y0{rep.p_match, rep.s_match};
  const double xi_hi = std::min(rep.xi_match + shadow_window, xs.back());
  rep.shadow_window = xi_hi - rep.xi_match;
  const Trajectory fm =
      integrate(vector_field(ModelSystem::FastMotion, pf), y0, rep.xi_match, xi_hi, IntegratorConfig{});
  double sgg = 0.0, sgd = 0.0;
  for (std::size_t k = km + 1; k < xs.size() && xs[k] <= xi_hi; ++k) {
    const auto q = dense_eval(fm, xs[k]);
    rep.shadow_max_dp = std::max(rep.shadow_max_dp, std::abs(q[0] - ps[k]));
    rep.shadow_max_ds = std::max(rep.shadow_max_ds, std::abs(q[1] - ss[k]));
    const double g = std::sqrt(std::max(0.0, rep.E0_match + ss[k] - std::sin(ss[k])));
    sgg += g * g;
    sgd += g * dss[k];
  }
  rep.coefficient_fit = sgd / sgg;

  std::vector<double> zero{0.0, 0.0};
  const Trajectory z = integrate(vector_field(ModelSystem::FastMotion, pf), zero, 0.0, 50.0);
  for (std::size_t i = 0; i < z.size(); ++i)
    rep.zero_data_drift = std::max(rep.zero_data_drift, std::abs(z.value(i, 0)) + std::abs(z.value(i, 1)));

  for (std::size_t k = 0; k < xs.size(); k += 25)
    rep.segment.push_back({xs[k], ps[k], ss[k], fast_motion_energy({ps[k], ss[k]})});
  return rep;
}

std::complex<double> linear_response(double T, double f, double delta) {
  if (!(T >= 0.0)) throw DomainError("linear response needs T >= 0");
  if (T == 0.0) return {0.0, 0.0};
  // Composite 8-point Gauss–Legendre, panels short against the local phase rate.
  static const double x[] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
  static const double wgt[] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  const std::size_t panels = static_cast<std::size_t>(std::ceil(T * std::max(T, 1.0) / 0.25)) + 8;
  const double hpan = T / static_cast<double>(panels);
  std::complex<double> sum(0.0, 0.0);
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = hpan * static_cast<double>(k);
    for (int j = 0; j < 8; ++j) {
      const double s = a + 0.5 * hpan * (x[j] + 1.0);
      sum += wgt[j] * std::exp(std::complex<double>(-delta * (T - s), 0.5 * (T * T - s * s)));
    }
  }
  sum *= 0.5 * hpan;
  return std::complex<double>(0.0, -f) * sum;
}

namespace {

struct Demodulated {
  std::vector<double> T;
  std::vector<std::complex<double>> psi;
  double T_escape = -1.0;
  double t_end = 0.0;
};

Demodulated demodulate(const DuffingParams& dp, double t_max, const DuffingOptions& opt) {
  std::vector<double> y0{0.0, 0.0};
  IntegratorConfig cfg = opt.cfg;
  const Trajectory tr = integrate(vector_field(dp), y0, 0.0, t_max, cfg);
  Demodulated out;
  out.t_end = tr.t_back();
  const int N = opt.samples_per_period;
  const double dt = kTwoPi / N;
  const std::size_t n = static_cast<std::size_t>(std::floor(out.t_end / dt));
  std::vector<std::complex<double>> z(n + 1);
  const double well = dp.c > 0.0 ? 1.0 / std::sqrt(dp.c) : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = dt * static_cast<double>(k);
    const double u = dense_eval(tr, t)[0];
    if (out.T_escape < 0.0 && std::abs(u) > well) out.T_escape = dp.slow_rate() * t;
    z[k] = u * std::exp(std::complex<double>(0.0, -dp.drive_phase(t)));
  }
  // Two passes of a centred one-period moving average via prefix sums.
  auto average = [&](const std::vector<std::complex<double>>& in) {
    const std::size_t m = in.size();
    const std::size_t half = static_cast<std::size_t>(N / 2);
    std::vector<std::complex<double>> pre(m + 1, {0.0, 0.0}), outv(m, {0.0, 0.0});
    for (std::size_t k = 0; k < m; ++k) pre[k + 1] = pre[k] + in[k];
    for (std::size_t c = half; c + half <= m; ++c)
      outv[c] = (pre[c + half] - pre[c - half]) / static_cast<double>(2 * half);
    return outv;
  };
  const auto a1 = average(z);
  const auto a2 = average(a1);
  const double scale = dp.amplitude_scale();
  const std::size_t lo = static_cast<std::size_t>(N), hi = n >= static_cast<std::size_t>(N) ? n - N : 0;
  for (std::size_t k = lo; k < hi; ++k) {
    out.T.push_back(dp.slow_rate() * dt * static_cast<double>(k));
    out.psi.push_back(a2[k] / scale);
  }
  return out;
}

EnvelopeComparison compare_envelopes(const DuffingParams& dp, const Demodulated& dm, double T_lo,
                                     double T_hi,
                                     const std::function<std::complex<double>(double)>& reference,
                                     std::size_t stride) {
  EnvelopeComparison c;
  c.c = dp.c;
  c.T_lo = T_lo;
  c.T_hi = T_hi;
  c.T_escape = dm.T_escape;
  double sa = 0.0, sc = 0.0, sn = 0.0;
  for (std::size_t k = 0; k < dm.T.size(); k += stride) {
    const double T = dm.T[k];
    if (T < T_lo || T > T_hi) continue;
    const std::complex<double> ref = reference(T);
    const std::complex<double> est = dm.psi[k];
    sa += (std::abs(est) - std::abs(ref)) * (std::abs(est) - std::abs(ref));
    sc += std::norm(est - ref);
    sn += std::norm(ref);
    ++c.points;
  }
  if (c.points == 0) throw DomainError("empty envelope comparison window");
  c.rms_amplitude = std::sqrt(sa / sn);
  c.rms_complex = std::sqrt(sc / sn);
  return c;
}

} // namespace

DuffingReport duffing_validation(const DuffingParams& dp, double t_max, const DuffingOptions& opt) {
  const Params p = map_duffing_params(dp);
  if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
  if (opt.samples_per_period < 8) throw DomainError("need at least 8 samples per period");
  const double rate = dp.slow_rate();
  const double window_T = kTwoPi * rate;
  if (window_T > 0.5) throw DomainError("demodulation window exceeds the slow-time resolution");

  DuffingReport rep;
  rep.dp = dp;
  rep.f = p.f();
  rep.delta = p.delta();
  rep.t_max = t_max;

  const Demodulated main = demodulate(dp, t_max, opt);
  const double T_lo = 2.0 * window_T;
  double T_hi = rate * opt.max_detuning / dp.chirp_rate();
  T_hi = std::min(T_hi, rate * (main.t_end - 2.0 * kTwoPi));
  const double T_ref_end = std::max(T_hi, T_lo) + 1.0;
  const Trajectory ref = simulate_capture(p, {0.0, 0.0}, T_ref_end);
  auto reference = [&](double T) {
    const auto y = dense_eval(ref, T);
    return std::complex<double>(y[0], y[1]);
  };
  rep.main = compare_envelopes(dp, main, T_lo, T_hi, reference, 1);

  if (opt.sign_experiment) {
    for (double c : {-dp.c, -2.0 * std::numbers::sqrt2}) {
      DuffingParams alt = dp;
      alt.c = c;
      const Demodulated dm = demodulate(alt, t_max, opt);
      const double hi = std::min(T_hi, rate * (dm.t_end - 2.0 * kTwoPi));
      rep.sign_runs.push_back(compare_envelopes(alt, dm, T_lo, hi, reference, 1));
    }
    rep.sign_confirmed = std::all_of(rep.sign_runs.begin(), rep.sign_runs.end(), [&](const auto& s) {
      return rep.main.rms_amplitude < s.rms_amplitude;
    });
  }
  if (opt.linear_control) {
    DuffingParams lin = dp;
    lin.c = 0.0;
    const Demodulated dm = demodulate(lin, t_max, opt);
    const double hi = std::min({T_hi, rate * opt.linear_max_detuning / dp.chirp_rate(),
                                rate * (dm.t_end - 2.0 * kTwoPi)});
    rep.linear = compare_envelopes(
        lin, dm, T_lo, hi, [&](double T) { return linear_response(T, p.f(), p.delta()); }, 4);
    rep.has_linear = true;
  }
  return rep;
}

EquivalenceReport representation_equivalence(const Params& p, double tau_hi, double arc,
                                              const IntegratorConfig& cfg) {
  const double d = p.delta();
  if (!(tau_hi > 2.0) || !(arc > 0.0)) throw DomainError("equivalence window must satisfy tau_hi > 2, arc > 0");
  EquivalenceReport rep;
  const Trajectory start = simulate_capture(p, {0.0, 0.0}, 1.0, cfg);
  const auto y1 = start.state(start.size() - 1);
  rep.tau_lo = 1.0;
  rep.tau_hi = tau_hi;
  std::vector<double> c0{y1[0], y1[1]};
  const Trajectory cx = integrate(vector_field(ModelSystem::ComplexPR, p), c0, 1.0, tau_hi, cfg);
  std::vector<double> p0{std::hypot(y1[0], y1[1]), std::atan2(y1[1], y1[0])};
  const Trajectory pl = integrate(vector_field(ModelSystem::PolarPR, p), p0, 1.0, tau_hi, cfg);
  for (std::size_t i = 0; i < pl.size(); ++i) {
    const auto y = dense_eval(cx, pl.time(i));
    const double Rc = std::hypot(y[0], y[1]);
    rep.max_rel_R = std::max(rep.max_rel_R, std::abs(Rc - pl.value(i, 0)) / Rc);
  }

  const double ta = 0.5 * tau_hi;
  const auto ya = dense_eval(cx, ta);
  const EnvelopeState ea{ta, {ya[0], ya[1]}};
  const ScaleFrame frame{p, 0.0};
  const EnvelopeState ra = convert_scale(ea, Scale::Tau, Scale::Theta, frame);
  std::vector<double> r0{ra.psi.real(), ra.psi.imag()};
  rep.theta_lo = ra.time;
  rep.theta_hi = (ta + arc) * d * d;
  const Trajectory arc_c = integrate(vector_field(ModelSystem::ComplexPR, p), {ya.data(), 2}, ta, ta + arc, cfg);
  const Trajectory arc_r =
      integrate(vector_field(ModelSystem::RescaledPR, p), r0, rep.theta_lo, rep.theta_hi, cfg);
  for (std::size_t i = 0; i < arc_r.size(); ++i) {
    const EnvelopeState er{arc_r.time(i), {arc_r.value(i, 0), arc_r.value(i, 1)}};
    const EnvelopeState back = convert_scale(er, Scale::Theta, Scale::Tau, frame);
    const double tc = std::clamp(back.time, arc_c.t_front(), arc_c.t_back());
    const auto y = dense_eval(arc_c, tc);
    const std::complex<double> num(y[0], y[1]);
    rep.max_rescaled = std::max(rep.max_rescaled, std::abs(num - back.psi) / std::abs(num));
  }
  rep.rescaled_tol = 1e3 * cfg.rel_tol;
  return rep;
}

} // namespace autores
