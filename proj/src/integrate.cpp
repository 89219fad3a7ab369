#include "autores/integrate.hpp"

#include "autores/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace autores {

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Interpolant P(s) = r1 + s(r2 + (1−s)(r3 + s(r4 + (1−s)r5))), s ∈ [0, 1].
void interpolate(std::span<const double> r, std::size_t n, double s, std::span<double> out) {
  const double s1 = 1.0 - s;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = r[i] + s * (r[n + i] + s1 * (r[2 * n + i] + s * (r[3 * n + i] + s1 * r[4 * n + i])));
  }
}

void interpolate_derivative(std::span<const double> r, std::size_t n, double s, double h,
                            std::span<double> out) {
  const double s1 = 1.0 - s;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = r[2 * n + i] + s * (r[3 * n + i] + s1 * r[4 * n + i]);
    const double dq = r[3 * n + i] + (1.0 - 2.0 * s) * r[4 * n + i];
    const double m = r[n + i] + s1 * q;
    const double dm = -q + s1 * dq;
    out[i] = (m + s * dm) / h;
  }
}

bool sign_change(double g0, double g1, Direction dir) {
  if (g0 == 0.0) return false;
  const bool rising = g0 < 0.0 && g1 >= 0.0;
  const bool falling = g0 > 0.0 && g1 <= 0.0;
  switch (dir) {
  case Direction::Rising: return rising;
  case Direction::Falling: return falling;
  case Direction::Any: return rising || falling;
  }
  return false;
}

struct Root {
  double t, lo, hi;
};

// Illinois variant of regula falsi on g over [ta, tb] with g(ta)·g(tb) ≤ 0.
template <class G>
Root illinois(const G& g, double ta, double ga, double tb, double gb) {
  const double tol = 1e-10 * std::max(1.0, std::max(std::abs(ta), std::abs(tb)));
  if (gb == 0.0) return {tb, tb, tb};
  int side = 0;
  for (int it = 0; it < 200 && std::abs(tb - ta) > tol; ++it) {
    double tc = (ta * gb - tb * ga) / (gb - ga);
    if (!(std::min(ta, tb) < tc && tc < std::max(ta, tb))) tc = 0.5 * (ta + tb);
    const double gc = g(tc);
    if (gc == 0.0) return {tc, tc, tc};
    if ((gc > 0.0) == (gb > 0.0)) {
      tb = tc;
      gb = gc;
      if (side == -1) ga *= 0.5;
      side = -1;
    } else {
      ta = tc;
      ga = gc;
      if (side == 1) gb *= 0.5;
      side = 1;
    }
  }
  // Report the endpoint on the far side of the sign change so that the event
  // function has already crossed at the returned time.
  return {tb, std::min(ta, tb), std::max(ta, tb)};
}

} // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (max_steps == 0) throw DomainError("max_steps must be positive");
  if (!(max_step > 0.0)) throw DomainError("max_step must be positive");
  if (initial_step < 0.0 || !std::isfinite(initial_step))
    throw DomainError("initial_step must be finite and nonnegative");
  if (!(blowup_norm > 0.0)) throw DomainError("blowup_norm must be positive");
  if (!(min_step_fraction > 0.0)) throw DomainError("min_step_fraction must be positive");
}

Event Event::crossing(std::size_t component, double threshold, Direction dir, bool terminal) {
  Event e;
  e.kind = EventKind::ThresholdCrossing;
  e.component = component;
  e.threshold = threshold;
  e.direction = dir;
  e.terminal = terminal;
  e.name = "crossing";
  return e;
}

Event Event::blow_up(double threshold) {
  Event e;
  e.kind = EventKind::BlowUp;
  e.threshold = threshold;
  e.direction = Direction::Rising;
  e.terminal = true;
  e.name = "blow_up";
  return e;
}

Event Event::custom(std::string name, std::function<double(double, std::span<const double>)> g,
                    Direction dir, bool terminal) {
  Event e;
  e.kind = EventKind::Custom;
  e.function = std::move(g);
  e.direction = dir;
  e.terminal = terminal;
  e.name = std::move(name);
  return e;
}

double Event::evaluate(double t, std::span<const double> y) const {
  switch (kind) {
  case EventKind::ThresholdCrossing: return y[component] - threshold;
  case EventKind::BlowUp: return inf_norm(y) - threshold;
  case EventKind::Custom: return function(t, y);
  }
  return 0.0;
}

MaxStepsExceeded::MaxStepsExceeded(std::size_t steps, Trajectory partial)
    : IntegrationError("maximum number of steps exceeded (" + std::to_string(steps) + ")"),
      partial_(std::move(partial)) {}

void Trajectory::push(double t, std::span<const double> y) {
  times_.push_back(t);
  states_.insert(states_.end(), y.begin(), y.end());
}

void Trajectory::push_dense(std::span<const double> coeffs, double h) {
  dense_.insert(dense_.end(), coeffs.begin(), coeffs.end());
  steps_.push_back(h);
}

std::size_t Trajectory::locate(double t) const {
  if (times_.empty()) throw DomainError("empty trajectory");
  const double lo = std::min(times_.front(), times_.back());
  const double hi = std::max(times_.front(), times_.back());
  if (!(t >= lo && t <= hi)) throw DomainError("time outside trajectory span");
  if (times_.size() == 1) return 0;
  std::size_t i;
  if (direction_ > 0) {
    i = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  } else {
    i = static_cast<std::size_t>(
        std::upper_bound(times_.begin(), times_.end(), t, std::greater<>()) - times_.begin());
  }
  if (i == 0) return 0;
  return std::min(i - 1, times_.size() - 2);
}

std::vector<double> Trajectory::dense(double t) const {
  const std::size_t i = locate(t);
  if (times_[i] == t) return {state(i).begin(), state(i).end()};
  if (i + 1 < times_.size() && times_[i + 1] == t) return {state(i + 1).begin(), state(i + 1).end()};
  std::vector<double> out(dim_);
  const double h = steps_[i];
  interpolate({dense_.data() + 5 * dim_ * i, 5 * dim_}, dim_, (t - times_[i]) / h, out);
  return out;
}

std::vector<double> Trajectory::dense_derivative(double t) const {
  const std::size_t i = locate(t);
  std::vector<double> out(dim_);
  if (times_.size() == 1) throw DomainError("trajectory has no steps");
  const double h = steps_[i];
  interpolate_derivative({dense_.data() + 5 * dim_ * i, 5 * dim_}, dim_, (t - times_[i]) / h, h,
                         out);
  return out;
}

std::vector<double> dense_eval(const Trajectory& traj, double t) { return traj.dense(t); }

std::vector<double> dense_derivative(const Trajectory& traj, double t) {
  return traj.dense_derivative(t);
}

Trajectory integrate(const VectorField& rhs, std::span<const double> y0, double t0, double t1,
                     const IntegratorConfig& cfg, const std::vector<Event>& events) {
  cfg.validate();
  const std::size_t n = y0.size();
  if (n == 0) throw DomainError("empty state vector");
  if (!std::isfinite(t0) || !std::isfinite(t1) || t0 == t1)
    throw DomainError("integration span must be finite and nondegenerate");
  if (!all_finite(y0)) throw DomainError("initial state must be finite");
  for (const Event& e : events) {
    if (e.kind == EventKind::Custom && !e.function) throw DomainError("custom event without function");
    if (e.kind == EventKind::ThresholdCrossing && e.component >= n)
      throw DomainError("event component out of range");
  }

  const double span = std::abs(t1 - t0);
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double h_min = cfg.min_step_fraction * span;

  Trajectory traj(n);
  traj.direction_ = static_cast<int>(dir);
  traj.push(t0, y0);

  std::vector<double> y(y0.begin(), y0.end()), ynew(n), ytmp(n), err(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<double> coeffs(5 * n);

  auto eval = [&](double t, std::span<const double> yy, std::span<double> dy) {
    rhs(t, yy, dy);
    ++traj.stats.rhs_evals;
  };

  auto norm_scaled = [&](std::span<const double> v, std::span<const double> ya,
                         std::span<const double> yb) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      s += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(s / static_cast<double>(n));
  };

  auto blow_up_here = [&](double t, std::span<const double> state) {
    EventHit hit;
    hit.time = t;
    hit.index = EventHit::npos;
    hit.kind = EventKind::BlowUp;
    hit.state.assign(state.begin(), state.end());
    hit.bracket_lo = hit.bracket_hi = t;
    traj.events.push_back(std::move(hit));
    traj.status = TrajectoryStatus::BlowUp;
    return traj;
  };

  double t = t0;
  eval(t, y, k1);
  if (!all_finite(k1)) return blow_up_here(t, y);

  double h = cfg.initial_step;
  if (h == 0.0) {
    const double dn0 = norm_scaled(y, y, y);
    const double dn1 = norm_scaled(k1, y, y);
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dir * h0 * k1[i];
    eval(t + dir * h0, ytmp, k2);
    double dn2 = 0.0;
    if (all_finite(k2)) {
      for (std::size_t i = 0; i < n; ++i) err[i] = k2[i] - k1[i];
      dn2 = norm_scaled(err, y, y) / h0;
    }
    const double dm = std::max(dn1, dn2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, cfg.max_step, span});

  std::vector<double> g_prev(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].evaluate(t, y);

  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (steps >= cfg.max_steps) throw MaxStepsExceeded(steps, std::move(traj));
    if (h < h_min) return blow_up_here(t, y);
    bool last = false;
    if (h >= std::abs(t1 - t) * (1.0 - 1e-14)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    eval(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    eval(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tnew = last ? t1 : t + hs;
    eval(tnew, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    eval(tnew, ynew, k7);

    if (!all_finite(ynew) || !all_finite(k7)) {
      h *= 0.25;
      last_rejected = true;
      ++traj.stats.rejected;
      ++steps;
      continue;
    }

    for (std::size_t i = 0; i < n; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double en = norm_scaled(err, y, ynew);
    ++steps;

    if (!(en <= 1.0)) {
      const double fac = std::max(kFacMin, kSafety * std::pow(en, -0.2));
      h *= last_rejected ? std::min(fac, 1.0) : fac;
      last_rejected = true;
      ++traj.stats.rejected;
      continue;
    }

    ++traj.stats.accepted;
    for (std::size_t i = 0; i < n; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = hs * k1[i] - ydiff;
      coeffs[i] = y[i];
      coeffs[n + i] = ydiff;
      coeffs[2 * n + i] = bspl;
      coeffs[3 * n + i] = ydiff - hs * k7[i] - bspl;
      coeffs[4 * n + i] =
          hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    const double h_step = tnew - t;
    auto dense_at = [&](double tt) {
      std::vector<double> out(n);
      interpolate(coeffs, n, (tt - t) / h_step, out);
      return out;
    };

    // Events in this step, earliest first; the first terminal one ends the run.
    struct Pending {
      Root root;
      std::size_t index;
      EventKind kind;
    };
    std::vector<Pending> pending;
    std::vector<double> g_new(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
      g_new[e] = events[e].evaluate(tnew, ynew);
      if (!sign_change(g_prev[e], g_new[e], events[e].direction)) continue;
      const Event& ev = events[e];
      auto g = [&](double tt) { return ev.evaluate(tt, dense_at(tt)); };
      pending.push_back({illinois(g, t, g_prev[e], tnew, g_new[e]), e, ev.kind});
    }
    if (inf_norm(ynew) > cfg.blowup_norm) {
      auto g = [&](double tt) { return inf_norm(dense_at(tt)) - cfg.blowup_norm; };
      const double g0 = inf_norm(y) - cfg.blowup_norm;
      const double g1 = inf_norm(ynew) - cfg.blowup_norm;
      Root r = g0 < 0.0 ? illinois(g, t, g0, tnew, g1) : Root{t, t, t};
      pending.push_back({r, EventHit::npos, EventKind::BlowUp});
    }
    std::sort(pending.begin(), pending.end(),
              [&](const Pending& a, const Pending& b) { return dir * a.root.t < dir * b.root.t; });

    bool stop = false;
    double t_stop = tnew;
    for (const Pending& pe : pending) {
      EventHit hit;
      hit.time = pe.root.t;
      hit.index = pe.index;
      hit.kind = pe.kind;
      hit.state = pe.root.t == tnew ? ynew : dense_at(pe.root.t);
      hit.bracket_lo = pe.root.lo;
      hit.bracket_hi = pe.root.hi;
      traj.events.push_back(std::move(hit));
      const bool terminal = pe.index == EventHit::npos || events[pe.index].terminal ||
                            pe.kind == EventKind::BlowUp;
      if (terminal) {
        stop = true;
        t_stop = pe.root.t;
        traj.status =
            pe.kind == EventKind::BlowUp ? TrajectoryStatus::BlowUp : TrajectoryStatus::TerminalEvent;
        break;
      }
    }

    if (stop) {
      if (dir * (t_stop - t) > 0.0) {
        traj.push_dense(coeffs, h_step);
        traj.push(t_stop, t_stop == tnew ? ynew : dense_at(t_stop));
      }
      return traj;
    }

    traj.push_dense(coeffs, h_step);
    traj.push(tnew, ynew);
    g_prev = g_new;
    t = tnew;
    y.swap(ynew);
    k1.swap(k7); // first-same-as-last

    double fac = std::pow(en, kAlpha) * std::pow(err_old, -kBeta) / kSafety;
    fac = std::clamp(1.0 / fac, kFacMin, kFacMax);
    if (last_rejected) fac = std::min(fac, 1.0);
    err_old = std::max(en, 1e-4);
    h = std::min(h * fac, cfg.max_step);
    last_rejected = false;
  }
  traj.status = TrajectoryStatus::Completed;
  return traj;
}

} // namespace autores
