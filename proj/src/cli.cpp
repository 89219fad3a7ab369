#include "autores/cli.hpp"

#include "autores/asymptotics.hpp"
#include "autores/harness.hpp"
#include "autores/painleve.hpp"
#include "autores/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace autores::cli {

namespace {

using report::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PoleInfo {
  double z0 = 0.0;
  double z0_err = 0.0;
  double order = 0.0;
  std::string provenance;
};

std::string cache_key(const IntegratorConfig& cfg, double z_seed) {
  std::ostringstream os;
  os << "p1_pole_rel" << report::format_double(cfg.rel_tol) << "_abs" << report::format_double(cfg.abs_tol)
     << "_seed" << report::format_double(z_seed) << ".json";
  return os.str();
}

// Cached values are written with 17 significant digits, so a cache hit
// reproduces a fresh computation exactly.
PoleInfo obtain_pole(bool use_cache) {
  const IntegratorConfig cfg = p1_default_config();
  const double z_seed = -100.0;
  std::optional<std::filesystem::path> file;
  if (use_cache) {
    if (auto dir = cache_dir()) file = *dir / cache_key(cfg, z_seed);
  }
  if (file && std::filesystem::exists(*file)) {
    try {
      std::ifstream in(*file);
      const Json j = Json::parse(in);
      return {j.at("z0").get<double>(), j.at("z0_err").get<double>(), j.at("pole_order").get<double>(),
              "computed"};
    } catch (const std::exception&) {
      // Unreadable cache: recompute and overwrite.
    }
  }
  const Painleve1Solution sol = first_pole_solution(z_seed, cfg);
  PoleInfo info{sol.z0, sol.z0_err, sol.pole_order, "computed"};
  if (file) {
    std::error_code ec;
    std::filesystem::create_directories(file->parent_path(), ec);
    const auto tmp = file->string() + ".tmp";
    {
      std::ofstream o(tmp);
      o << report::dump({{"z0", info.z0}, {"z0_err", info.z0_err}, {"pole_order", info.order}});
    }
    std::filesystem::rename(tmp, *file, ec);
  }
  return info;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + path);
  o << text;
  if (!o) throw std::runtime_error("write failed for " + path);
}

std::string status_name(TrajectoryStatus s) {
  switch (s) {
  case TrajectoryStatus::Completed:
    return "completed";
  case TrajectoryStatus::TerminalEvent:
    return "terminal_event";
  case TrajectoryStatus::BlowUp:
    return "blow_up";
  }
  return "unknown";
}

struct Common {
  std::optional<double> rel_tol, abs_tol;
  bool no_cache = false;

  IntegratorConfig apply(IntegratorConfig cfg) const {
    if (rel_tol) cfg.rel_tol = *rel_tol;
    if (abs_tol) cfg.abs_tol = *abs_tol;
    try {
      cfg.validate();
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

Json finish(Json j, const Json& checks) {
  bool ok = true;
  for (const auto& [k, v] : checks.items()) ok = ok && v.get<bool>();
  j["checks"] = checks;
  j["passed"] = ok;
  return j;
}

void emit_report(const Json& j, const std::string& output, std::ostream& out) {
  const std::string text = report::dump(j);
  if (!output.empty()) write_file(output, text);
  out << text;
}

int exit_for(const Json& j) { return j.at("passed").get<bool>() ? kExitOk : kExitCheckFailed; }

void error_line(std::ostream& err, const std::string& kind, const std::string& msg, int code) {
  err << report::dump(Json{{"error", msg}, {"kind", kind}, {"exit_code", code}}, -1) << '\n';
}

} // namespace

std::optional<std::filesystem::path> cache_dir() {
  if (const char* d = std::getenv("AUTORES_CACHE_DIR"); d && *d) return std::filesystem::path(d);
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return std::filesystem::path(x) / "autores";
  if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "autores";
  return std::nullopt;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Autoresonance capture, break prediction and validation experiments", "autores"};
  app.set_config("--config", "", "Config file (key=value or TOML); command-line flags override it");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Common common;
  app.add_option("--rel-tol", common.rel_tol, "Relative integrator tolerance");
  app.add_option("--abs-tol", common.abs_tol, "Absolute integrator tolerance");
  app.add_flag("--no-cache", common.no_cache, "Recompute the Painlevé pole instead of using the cache");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Integrate the envelope equation and detect the break");
  double s_f = 0.0, s_delta = 0.0, s_tau_max = 150.0, s_tau_start = 0.0, s_re = 0.0, s_im = 0.0;
  double s_kappa = 0.2;
  std::optional<double> s_z0;
  std::string s_format = "csv", s_output = "simulate";
  sim->add_option("--f", s_f, "Forcing amplitude")->required();
  sim->add_option("--delta", s_delta, "Dissipation")->required();
  sim->add_option("--tau-max", s_tau_max, "End time")->capture_default_str();
  sim->add_option("--tau-start", s_tau_start, "Start time")->capture_default_str();
  sim->add_option("--psi0-re", s_re, "Initial Re Ψ")->capture_default_str();
  sim->add_option("--psi0-im", s_im, "Initial Im Ψ")->capture_default_str();
  sim->add_option("--kappa-break", s_kappa, "Lock-indicator threshold")->capture_default_str();
  sim->add_option("--z0", s_z0, "Painlevé pole to use instead of computing it");
  sim->add_option("--format", s_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("-o,--output", s_output, "Output path prefix")->capture_default_str();

  // predict
  auto* pred = app.add_subcommand("predict", "Break time and amplitude from the asymptotic formulas");
  double p_f = 0.0, p_delta = 0.0;
  std::optional<double> p_z0;
  pred->add_option("--f", p_f, "Forcing amplitude")->required();
  pred->add_option("--delta", p_delta, "Dissipation")->required();
  pred->add_option("--z0", p_z0, "Painlevé pole to use instead of computing it");

  // painleve
  auto* pain = app.add_subcommand("painleve", "Integrate Painlevé-1 from its asymptotic seed");
  double y_seed = -100.0, y_end = 20.0;
  int y_terms = 4;
  std::string y_branch = "negative", y_output = "painleve", y_format = "csv";
  pain->add_option("--z-seed", y_seed, "Seed abscissa")->capture_default_str();
  pain->add_option("--z-end", y_end, "End abscissa")->capture_default_str();
  pain->add_option("--terms", y_terms, "Seed series terms (0..4)")->capture_default_str();
  pain->add_option("--branch", y_branch, "negative or positive")->check(CLI::IsMember({"negative", "positive"}));
  pain->add_option("--format", y_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  pain->add_option("-o,--output", y_output, "Output path prefix")->capture_default_str();

  // validate
  auto* val = app.add_subcommand("validate", "Run a validation experiment");
  val->require_subcommand(1, 1);
  std::string v_output;

  auto* sweep = val->add_subcommand("sweep", "Break-time convergence over δ");
  double w_f = 1.0, w_margin = 30.0;
  std::vector<double> w_deltas = {0.1, 0.05, 0.025};
  sweep->add_option("--f", w_f, "Forcing amplitude")->capture_default_str();
  sweep->add_option("--deltas", w_deltas, "Strictly decreasing δ values, comma-separated")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--tau-margin", w_margin, "Integration margin past the predicted break")->capture_default_str();
  sweep->add_option("-o,--output", v_output, "Also write the report here");

  auto* stab = val->add_subcommand("stability", "Decay of oscillations about the outer solution");
  double t_f = 1.0, t_delta = 0.05, t_pert = 0.1, t_lo = 0.2, t_hi = 0.55;
  StabilityOptions t_opt;
  stab->add_option("--f", t_f, "Forcing amplitude")->capture_default_str();
  stab->add_option("--delta", t_delta, "Dissipation")->capture_default_str();
  stab->add_option("--perturbation", t_pert, "Relative perturbation size")->capture_default_str();
  stab->add_option("--theta-lo", t_lo, "Window start")->capture_default_str();
  stab->add_option("--theta-hi", t_hi, "Window end")->capture_default_str();
  stab->add_option("--directions", t_opt.directions, "Number of perturbation directions")->capture_default_str();
  stab->add_option("--seed", t_opt.seed, "Seed for the direction offset")->capture_default_str();
  stab->add_option("--validity", t_opt.validity, "Outer validity threshold")->capture_default_str();
  stab->add_flag("--zero-data", t_opt.zero_data, "Start from Ψ = 0 at τ = 0 instead");
  stab->add_option("-o,--output", v_output, "Also write the report here");

  auto* duff = val->add_subcommand("duffing", "Demodulated Duffing oscillator against the envelope equation");
  DuffingParams d_dp;
  d_dp.eps = 0.001;
  d_dp.b = 0.004;
  d_dp.A = 4.0 * std::sqrt(2.0);
  std::optional<double> d_alpha, d_tmax;
  DuffingOptions d_opt;
  bool d_no_sign = false, d_no_linear = false;
  double d_threshold = 0.1, d_linear_threshold = 0.02;
  duff->add_option("--eps", d_dp.eps, "ε")->capture_default_str();
  duff->add_option("--b", d_dp.b, "Damping b")->capture_default_str();
  duff->add_option("--A", d_dp.A, "Drive amplitude A")->capture_default_str();
  duff->add_option("--c", d_dp.c, "Cubic coefficient c")->capture_default_str();
  duff->add_option("--alpha", d_alpha, "Chirp rate (default 4ε^{4/3})");
  duff->add_option("--t-max", d_tmax, "End of the fast-time integration");
  duff->add_option("--max-detuning", d_opt.max_detuning, "Comparison window end as drive detuning")->capture_default_str();
  duff->add_option("--threshold", d_threshold, "Pass threshold on the RMS amplitude mismatch")->capture_default_str();
  duff->add_flag("--no-sign", d_no_sign, "Skip the sign experiment");
  duff->add_flag("--no-linear", d_no_linear, "Skip the linear control");
  duff->add_option("-o,--output", v_output, "Also write the report here");

  auto* fm = val->add_subcommand("fast-motion", "Post-break fast motion in the (p, s) variables");
  double m_f = 1.0, m_delta = 0.05, m_window = 1.0, m_after = 6.0;
  fm->add_option("--f", m_f, "Forcing amplitude")->capture_default_str();
  fm->add_option("--delta", m_delta, "Dissipation")->capture_default_str();
  fm->add_option("--window", m_window, "Shadowing window in ξ")->capture_default_str();
  fm->add_option("--xi-after", m_after, "Extraction end in ξ")->capture_default_str();
  fm->add_option("-o,--output", v_output, "Also write the report here");

  auto* eq = val->add_subcommand("equivalence", "Complex, polar and rescaled forms on the same data");
  double e_f = 1.0, e_delta = 0.1, e_tau_hi = 85.0, e_arc = 5.0;
  eq->add_option("--f", e_f, "Forcing amplitude")->capture_default_str();
  eq->add_option("--delta", e_delta, "Dissipation")->capture_default_str();
  eq->add_option("--tau-hi", e_tau_hi, "End of the complex/polar comparison")->capture_default_str();
  eq->add_option("--arc", e_arc, "Length in τ of the rescaled comparison")->capture_default_str();
  eq->add_option("-o,--output", v_output, "Also write the report here");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      const Params p(s_f, s_delta);
      if (!(s_tau_max > s_tau_start)) throw UsageError("--tau-max must exceed --tau-start");
      if (!(s_kappa > 0.0)) throw UsageError("--kappa-break must be positive");
      const IntegratorConfig cfg = common.apply(capture_config());
      const Trajectory tr = simulate_capture(p, {s_re, s_im}, s_tau_max, cfg, s_tau_start);
      BreakOptions bo;
      bo.kappa_break = s_kappa;
      BreakReport br = detect_break(tr, p, bo);
      Json j = {{"command", "simulate"},
                {"params", report::to_json(p)},
                {"config", report::to_json(cfg)},
                {"tau_window", Json::array({s_tau_start, s_tau_max})},
                {"psi0", Json::array({s_re, s_im})},
                {"status", status_name(tr.status)},
                {"stats", report::to_json(tr.stats)},
                {"samples_count", tr.size()}};
      PoleInfo pole = s_z0 ? PoleInfo{*s_z0, 0.0, -2.0, "user"} : obtain_pole(!common.no_cache);
      try {
        attach_prediction(br, p, pole.z0);
        j["z0_provenance"] = pole.provenance;
      } catch (const DomainError& e) {
        j["prediction_unavailable"] = e.what();
      }
      j["break"] = report::to_json(br);
      if (s_format == "json") {
        j["columns"] = Json::array({"tau", "psi_re", "psi_im", "R", "phi"});
        j["samples"] = report::trajectory_rows(tr);
        write_file(s_output + ".json", report::dump(j));
        out << "wrote " << s_output << ".json\n";
      } else {
        std::ostringstream csv;
        report::write_trajectory_csv(csv, tr);
        write_file(s_output + ".csv", csv.str());
        j["csv"] = s_output + ".csv";
        write_file(s_output + ".json", report::dump(j));
        out << "wrote " << s_output << ".csv\nwrote " << s_output << ".json\n";
      }
      return kExitOk;
    }

    if (pred->parsed()) {
      const Params p(p_f, p_delta);
      const PoleInfo pole = p_z0 ? PoleInfo{*p_z0, 0.0, -2.0, "user"} : obtain_pole(!common.no_cache);
      const Prediction pr = predict(p, pole.z0);
      Json j = report::to_json(pr);
      j["command"] = "predict";
      j["params"] = report::to_json(p);
      j["z0_err"] = pole.z0_err;
      j["pole_order"] = pole.order;
      j["z0_provenance"] = pole.provenance;
      out << report::dump(j);
      return kExitOk;
    }

    if (pain->parsed()) {
      if (!(y_seed < y_end)) throw UsageError("--z-seed must be below --z-end");
      SeedOptions so;
      so.branch = y_branch == "positive" ? P1Branch::Positive : P1Branch::Negative;
      so.terms = y_terms;
      const IntegratorConfig cfg = common.apply(p1_default_config());
      Painleve1Solution sol = solve_p1(y_seed, y_end, cfg, so);
      Json j = {{"command", "painleve"}};
      if (sol.blew_up) {
        const PoleEstimate e = locate_first_pole(sol);
        sol.z0 = e.z0;
        sol.z0_err = e.z0_err;
        sol.pole_order = e.order;
        j["pole"] = report::to_json(e);
      }
      j["solution"] = report::to_json(sol);
      if (sol.blew_up) {
        j["z0"] = sol.z0;
        j["z0_err"] = sol.z0_err;
        j["pole_order"] = sol.pole_order;
      }
      if (y_format == "json") {
        Json rows = Json::array();
        for (std::size_t i = 0; i < sol.traj.size(); ++i)
          rows.push_back(Json::array({sol.traj.time(i), sol.traj.value(i, 0), sol.traj.value(i, 1)}));
        j["columns"] = Json::array({"z", "y", "yprime"});
        j["samples"] = rows;
        write_file(y_output + ".json", report::dump(j));
        out << "wrote " << y_output << ".json\n";
      } else {
        std::ostringstream csv;
        report::write_p1_csv(csv, sol);
        write_file(y_output + ".csv", csv.str());
        j["csv"] = y_output + ".csv";
        write_file(y_output + ".json", report::dump(j));
        out << "wrote " << y_output << ".csv\nwrote " << y_output << ".json\n";
      }
      return kExitOk;
    }

    if (sweep->parsed()) {
      const IntegratorConfig cfg = common.apply(capture_config());
      if (!(w_margin > 0.0)) throw UsageError("--tau-margin must be positive");
      const PoleInfo pole = obtain_pole(!common.no_cache);
      const SweepResult s = convergence_sweep(w_f, w_deltas, w_margin, pole.z0, cfg);
      Json j = report::to_json(s);
      j["command"] = "validate sweep";
      j["config"] = report::to_json(cfg);
      j = finish(j, {{"monotone", s.monotone},
                     {"refined_beats_crude", s.refined_beats_crude},
                     {"order_at_least_2", s.fitted_order >= 2.0}});
      emit_report(j, v_output, out);
      return exit_for(j);
    }

    if (stab->parsed()) {
      const Params p(t_f, t_delta);
      t_opt.cfg = common.apply(capture_config());
      const StabilityReport s = stability_experiment(p, t_lo, t_hi, t_pert, t_opt);
      Json j = report::to_json(s);
      j["command"] = "validate stability";
      j["zero_data"] = t_opt.zero_data;
      j["config"] = report::to_json(t_opt.cfg);
      Json checks;
      if (t_pert == 0.0 && !t_opt.zero_data) {
        bool below = true;
        for (const auto& [th, env] : s.perturbation_norm_series) below = below && env < s.floor;
        checks["below_floor"] = below;
      } else {
        checks["decay_detected"] = s.decay_detected;
        checks["no_escape"] = !s.escaped;
        checks["negative_rate"] = s.fitted_decay_rate < 0.0;
      }
      j = finish(j, checks);
      emit_report(j, v_output, out);
      return exit_for(j);
    }

    if (duff->parsed()) {
      if (d_alpha) d_dp.alpha = *d_alpha;
      const Params p = map_duffing_params(d_dp);
      d_opt.sign_experiment = !d_no_sign;
      d_opt.linear_control = !d_no_linear;
      IntegratorConfig cfg;
      cfg.rel_tol = 1e-10;
      cfg.abs_tol = 1e-13;
      d_opt.cfg = common.apply(cfg);
      const double t_max =
          d_tmax ? *d_tmax : d_opt.max_detuning / d_dp.chirp_rate() + 4.0 * std::numbers::pi;
      const DuffingReport r = duffing_validation(d_dp, t_max, d_opt);
      Json j = report::to_json(r);
      j["command"] = "validate duffing";
      j["mapped"] = report::to_json(p);
      j["config"] = report::to_json(d_opt.cfg);
      Json checks = {{"envelope_match", r.main.rms_amplitude < d_threshold}};
      if (r.has_linear) checks["linear_control"] = r.linear.rms_amplitude < d_linear_threshold;
      if (d_opt.sign_experiment) checks["sign_confirmed"] = r.sign_confirmed;
      j["threshold"] = d_threshold;
      j = finish(j, checks);
      emit_report(j, v_output, out);
      return exit_for(j);
    }

    if (fm->parsed()) {
      const Params p(m_f, m_delta);
      const IntegratorConfig cfg = common.apply(capture_config());
      const PoleInfo pole = obtain_pole(!common.no_cache);
      const FastMotionReport r = fast_motion_transition(p, pole.z0, m_window, m_after, cfg);
      Json j = report::to_json(r);
      j["command"] = "validate fast-motion";
      j["config"] = report::to_json(cfg);
      j = finish(j, {{"energy_near_zero", std::abs(r.E0_match) < 0.1},
                     {"running_phase", r.running_phase},
                     {"s_monotone", r.s_monotone}});
      emit_report(j, v_output, out);
      return exit_for(j);
    }

    if (eq->parsed()) {
      const Params p(e_f, e_delta);
      IntegratorConfig cfg;
      cfg.rel_tol = 1e-11;
      cfg.abs_tol = 1e-13;
      cfg = common.apply(cfg);
      const EquivalenceReport r = representation_equivalence(p, e_tau_hi, e_arc, cfg);
      Json j = report::to_json(r);
      j["command"] = "validate equivalence";
      j["config"] = report::to_json(cfg);
      j = finish(j, {{"polar_agrees", r.max_rel_R < 1e-6}, {"rescaled_agrees", r.max_rescaled < r.rescaled_tol}});
      emit_report(j, v_output, out);
      return exit_for(j);
    }
  } catch (const UsageError& e) {
    error_line(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const DomainError& e) {
    error_line(err, "domain", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    error_line(err, "runtime", e.what(), kExitCheckFailed);
    return kExitCheckFailed;
  }
  error_line(err, "usage", "no command given", kExitUsage);
  return kExitUsage;
}

} // namespace autores::cli
