#include "autores/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace autores::report {

namespace {

std::string escape(const std::string& s) { return Json(s).dump(); }

void emit(const Json& j, int indent, int depth, std::string& out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(d * indent), ' ');
  };
  switch (j.type()) {
  case Json::value_t::null:
    out += "null";
    break;
  case Json::value_t::boolean:
    out += j.get<bool>() ? "true" : "false";
    break;
  case Json::value_t::number_integer:
    out += std::to_string(j.get<std::int64_t>());
    break;
  case Json::value_t::number_unsigned:
    out += std::to_string(j.get<std::uint64_t>());
    break;
  case Json::value_t::number_float:
    out += format_double(j.get<double>());
    break;
  case Json::value_t::string:
    out += escape(j.get<std::string>());
    break;
  case Json::value_t::array: {
    if (j.empty()) {
      out += "[]";
      break;
    }
    // Arrays of scalars stay on one line.
    const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
    out += '[';
    bool first = true;
    for (const auto& e : j) {
      if (!first) out += flat && pretty ? ", " : ",";
      if (!flat) newline(depth + 1);
      emit(e, indent, depth + 1, out);
      first = false;
    }
    if (!flat) newline(depth);
    out += ']';
    break;
  }
  case Json::value_t::object: {
    if (j.empty()) {
      out += "{}";
      break;
    }
    out += '{';
    bool first = true;
    for (const auto& [k, v] : j.items()) { // std::map storage: keys arrive sorted
      if (!first) out += ',';
      newline(depth + 1);
      out += escape(k);
      out += pretty ? ": " : ":";
      emit(v, indent, depth + 1, out);
      first = false;
    }
    newline(depth);
    out += '}';
    break;
  }
  default:
    out += "null";
  }
}

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json series(const std::vector<std::pair<double, double>>& s) {
  Json a = Json::array();
  for (const auto& [x, y] : s) a.push_back(Json::array({num(x), num(y)}));
  return a;
}

} // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string dump(const Json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  if (indent >= 0) out += '\n';
  return out;
}

Json to_json(const Params& p) { return {{"f", num(p.f())}, {"delta", num(p.delta())}}; }

Json to_json(const DuffingParams& dp) {
  return {{"eps", num(dp.eps)},         {"b", num(dp.b)},
          {"A", num(dp.A)},             {"c", num(dp.c)},
          {"alpha", num(dp.chirp_rate())}, {"slow_rate", num(dp.slow_rate())}};
}

Json to_json(const IntegratorConfig& cfg) {
  return {{"rel_tol", num(cfg.rel_tol)},     {"abs_tol", num(cfg.abs_tol)},
          {"max_step", num(cfg.max_step)},   {"max_steps", cfg.max_steps},
          {"blowup_norm", num(cfg.blowup_norm)}};
}

Json to_json(const IntegrationStats& s) {
  return {{"accepted", s.accepted}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
}

Json to_json(const Prediction& pr) {
  return {{"theta_star", num(pr.theta_star)},
          {"tau_star", num(pr.tau_star)},
          {"tau_star_refined", num(pr.tau_star_refined)},
          {"R_star_psi", num(pr.R_star_psi)},
          {"R_star_Psi", num(pr.R_star_Psi)},
          {"z0", num(pr.z0_used)},
          {"tau0", num(pr.tau0)},
          {"theta_star_printed_scale", num(pr.theta_star_printed_scale)}};
}

Json to_json(const BreakReport& r) {
  Json stages = {{"captured", r.stages.captured},
                 {"tau_lock", num(r.stages.tau_lock)},
                 {"tracked", r.stages.tracked},
                 {"fast_after_break", r.stages.fast_after_break},
                 {"post_break_mean_R", num(r.stages.post_break_mean_R)},
                 {"post_break_phase_turns", num(r.stages.post_break_phase_turns)},
                 {"three_stages", r.stages.three_stages}};
  Json j = {{"broke", r.broke},
            {"stages", stages},
            {"R_max_measured", num(r.R_max_measured)},
            {"tau_R_max", num(r.tau_R_max)}};
  if (r.broke) {
    j["tau_break_coarse"] = num(r.tau_break_coarse);
    j["tau_break_measured"] = num(r.tau_break_measured);
    j["theta_break_measured"] = num(r.theta_break_measured);
  } else {
    j["tau_lower_bound"] = num(r.tau_lower_bound);
  }
  if (r.has_prediction) {
    j["prediction"] = to_json(r.prediction);
    if (r.broke) j["rel_err_theta"] = num(r.rel_err_theta);
    j["rel_err_Rmax"] = num(r.rel_err_Rmax);
  }
  return j;
}

Json to_json(const SweepResult& s) {
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"delta", num(e.delta)},
                       {"err_refined", num(e.err_refined)},
                       {"err_crude", num(e.err_crude)},
                       {"err_printed", num(e.err_printed)},
                       {"report", to_json(e.report)}});
  }
  return {{"f", num(s.f)},
          {"z0", num(s.z0)},
          {"entries", entries},
          {"warnings", s.warnings},
          {"fitted_order", num(s.fitted_order)},
          {"fitted_order_crude", num(s.fitted_order_crude)},
          {"monotone", s.monotone},
          {"refined_beats_crude", s.refined_beats_crude}};
}

Json to_json(const StabilityReport& s) {
  Json runs = Json::array();
  for (const auto& r : s.runs) {
    runs.push_back({{"direction", num(r.direction)},
                    {"initial_norm", num(r.initial_norm)},
                    {"final_norm", num(r.final_norm)},
                    {"fitted_decay_rate", num(r.fitted_decay_rate)},
                    {"decay_detected", r.decay_detected},
                    {"escaped", r.escaped},
                    {"periods", num(r.periods)}});
  }
  return {{"f", num(s.f)},
          {"delta", num(s.delta)},
          {"perturbation", num(s.perturbation)},
          {"theta_window", Json::array({num(s.theta_lo), num(s.theta_hi)})},
          {"runs", runs},
          {"perturbation_norm_series", series(s.perturbation_norm_series)},
          {"decay_detected", s.decay_detected},
          {"fitted_decay_rate", num(s.fitted_decay_rate)},
          {"escaped", s.escaped},
          {"floor", num(s.floor)},
          {"linearized_rate", num(s.linearized_rate)},
          {"wkb_real_part", num(s.wkb_real_part)}};
}

Json to_json(const FastMotionReport& r) {
  Json seg = Json::array();
  for (const auto& row : r.segment) seg.push_back(Json::array({num(row[0]), num(row[1]), num(row[2]), num(row[3])}));
  return {{"f", num(r.f)},
          {"delta", num(r.delta)},
          {"z0", num(r.z0)},
          {"tau0", num(r.tau0)},
          {"xi_match", num(r.xi_match)},
          {"p_match", num(r.p_match)},
          {"s_match", num(r.s_match)},
          {"E0_match", num(r.E0_match)},
          {"running_phase", r.running_phase},
          {"s_monotone", r.s_monotone},
          {"s_end", num(r.s_end)},
          {"xi_end", num(r.xi_end)},
          {"shadow_window", num(r.shadow_window)},
          {"shadow_max_ds", num(r.shadow_max_ds)},
          {"shadow_max_dp", num(r.shadow_max_dp)},
          {"coefficient_fit", num(r.coefficient_fit)},
          {"coefficient_expected", num(r.coefficient_expected)},
          {"zero_data_drift", num(r.zero_data_drift)},
          {"segment_columns", Json::array({"xi", "p", "s", "E0"})},
          {"segment", seg}};
}

Json to_json(const EnvelopeComparison& c) {
  return {{"c", num(c.c)},
          {"T_window", Json::array({num(c.T_lo), num(c.T_hi)})},
          {"rms_amplitude", num(c.rms_amplitude)},
          {"rms_complex", num(c.rms_complex)},
          {"points", c.points},
          {"T_escape", c.T_escape < 0.0 ? Json(nullptr) : num(c.T_escape)}};
}

Json to_json(const DuffingReport& r) {
  Json sign = Json::array();
  for (const auto& s : r.sign_runs) sign.push_back(to_json(s));
  Json j = {{"duffing", to_json(r.dp)},
            {"f", num(r.f)},
            {"delta", num(r.delta)},
            {"t_max", num(r.t_max)},
            {"main", to_json(r.main)},
            {"sign_runs", sign},
            {"sign_confirmed", r.sign_confirmed}};
  if (r.has_linear) j["linear"] = to_json(r.linear);
  return j;
}

Json to_json(const EquivalenceReport& r) {
  return {{"max_rel_R", num(r.max_rel_R)},
          {"tau_window", Json::array({num(r.tau_lo), num(r.tau_hi)})},
          {"max_rescaled", num(r.max_rescaled)},
          {"rescaled_tol", num(r.rescaled_tol)},
          {"theta_window", Json::array({num(r.theta_lo), num(r.theta_hi)})}};
}

Json to_json(const PoleEstimate& e) {
  return {{"z0", num(e.z0)},
          {"z0_err", num(e.z0_err)},
          {"order", num(e.order)},
          {"z0_coarse", num(e.z0_coarse)},
          {"z0_refined", num(e.z0_refined)}};
}

Json to_json(const Painleve1Solution& sol) {
  Json j = {{"z_seed", num(sol.z_seed)},
            {"z_end", num(sol.z_end)},
            {"branch", to_string(sol.seed.branch)},
            {"seed_terms", sol.seed.terms},
            {"config", to_json(sol.cfg)},
            {"blew_up", sol.blew_up},
            {"samples", sol.traj.size()},
            {"defect", num(p1_defect(sol))}};
  if (sol.z0 != 0.0) {
    j["z0"] = num(sol.z0);
    j["z0_err"] = num(sol.z0_err);
    j["pole_order"] = num(sol.pole_order);
  }
  return j;
}

namespace {

template <class Row>
void for_each_row(const Trajectory& tr, Row&& row) {
  double phi = 0.0;
  bool have = false;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double re = tr.value(i, 0), im = tr.value(i, 1);
    const double R = std::hypot(re, im);
    if (R > 0.0) {
      const double a = std::atan2(im, re);
      phi = have ? unwrap_near(a, phi) : a;
      have = true;
    }
    row(tr.time(i), re, im, R, phi);
  }
}

} // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "tau,psi_re,psi_im,R,phi\n";
  for_each_row(tr, [&](double t, double re, double im, double R, double phi) {
    os << format_double(t) << ',' << format_double(re) << ',' << format_double(im) << ','
       << format_double(R) << ',' << format_double(phi) << '\n';
  });
}

Json trajectory_rows(const Trajectory& tr) {
  Json rows = Json::array();
  for_each_row(tr, [&](double t, double re, double im, double R, double phi) {
    rows.push_back(Json::array({num(t), num(re), num(im), num(R), num(phi)}));
  });
  return rows;
}

void write_p1_csv(std::ostream& os, const Painleve1Solution& sol) {
  os << "z,y,yprime\n";
  for (std::size_t i = 0; i < sol.traj.size(); ++i) {
    os << format_double(sol.traj.time(i)) << ',' << format_double(sol.traj.value(i, 0)) << ','
       << format_double(sol.traj.value(i, 1)) << '\n';
  }
}

} // namespace autores::report
