#pragma once

// End-to-end experiments: capture runs and break detection, δ-convergence
// sweeps, the stability experiment, the fast-motion transition and the
// Duffing reduction check.

#include "autores/asymptotics.hpp"
#include "autores/core.hpp"
#include "autores/integrate.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace autores {

IntegratorConfig capture_config();

/// Integrate the complex form from Ψ(tau_start) = psi0 to tau_max.
Trajectory simulate_capture(const Params& p, std::complex<double> psi0, double tau_max,
                            const IntegratorConfig& cfg = capture_config(), double tau_start = 0.0);

/// Period of small oscillations about the locked state at time τ (Ψ scale).
/// Finite for δ = 0; clamped away from τ = 0 and from θ = f².
double local_period(double tau, const Params& p);

struct BreakOptions {
  double kappa_break = 0.2;  // threshold on the smoothed lock indicator
  double window_periods = 5.0;
  double max_window = 50.0;  // cap on the smoothing window in τ
};

struct StageSummary {
  bool captured = false;        // the lock indicator falls below κ at some point
  double tau_lock = 0.0;        // start of the sustained lock
  bool tracked = false;         // R ≈ √τ between tau_lock and the break
  bool fast_after_break = false;
  double post_break_mean_R = 0.0;
  double post_break_phase_turns = 0.0;
  bool three_stages = false;
};

struct BreakReport {
  bool broke = false;
  double tau_lower_bound = 0.0; // end of span when no break was seen
  double tau_break_coarse = 0.0;   // sustained loss of amplitude tracking
  double tau_break_measured = 0.0; // phase slip after the amplitude maximum
  double theta_break_measured = 0.0;
  double R_max_measured = 0.0;     // Ψ scale
  double tau_R_max = 0.0;
  StageSummary stages;
  bool has_prediction = false;
  Prediction prediction;
  double rel_err_theta = 0.0;
  double rel_err_Rmax = 0.0;
};

/// Lock indicator L(τ) = |R − √τ|/√τ, averaged over window_periods local
/// periods. The coarse break is the last upward crossing of κ_break; the
/// measured break is the first upward zero of sin φ after the maximum of R.
BreakReport detect_break(const Trajectory& traj, const Params& p, const BreakOptions& opt = {});

/// Fill the prediction fields of a report.
void attach_prediction(BreakReport& r, const Params& p, double z0);

/// Capture from Ψ = 0 up to θ*/δ² + tau_margin, then detect_break and predict.
BreakReport capture_break_report(const Params& p, double z0, double tau_margin = 30.0,
                                 const IntegratorConfig& cfg = capture_config(),
                                 const BreakOptions& opt = {});

struct SweepEntry {
  double delta = 0.0;
  BreakReport report;
  double err_refined = 0.0; // |θ_meas − θ*|
  double err_crude = 0.0;   // |θ_meas − f²|
  double err_printed = 0.0; // |θ_meas − θ* with the printed z-scale|
};

struct SweepResult {
  double f = 0.0;
  double z0 = 0.0;
  std::vector<SweepEntry> entries;
  std::vector<std::string> warnings;
  double fitted_order = 0.0;
  double fitted_order_crude = 0.0;
  bool monotone = false;
  bool refined_beats_crude = false;
};

/// Runs in parallel over δ; deltas must be ≥ 3, strictly decreasing and < 0.2f.
SweepResult convergence_sweep(double f, const std::vector<double>& deltas, double tau_margin,
                              double z0, const IntegratorConfig& cfg = capture_config());

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct StabilityOptions {
  double validity = 0.25;
  int k_max = 2;
  std::uint64_t seed = 20240611;
  int directions = 4;
  bool zero_data = false; // capture from Ψ = 0 at τ = 0; perturbation is ignored
  IntegratorConfig cfg = capture_config();
};

struct StabilityRun {
  double direction = 0.0; // angle β: δR/R = ε cos β, δφ = ε sin β
  std::vector<std::pair<double, double>> norm_series; // (θ, relative distance envelope)
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double fitted_decay_rate = 0.0; // per unit τ
  bool decay_detected = false;
  bool escaped = false;
  double periods = 0.0;
};

struct StabilityReport {
  double f = 0.0, delta = 0.0, perturbation = 0.0;
  double theta_lo = 0.0, theta_hi = 0.0;
  std::vector<StabilityRun> runs;
  std::vector<std::pair<double, double>> perturbation_norm_series; // first run
  bool decay_detected = false;     // all runs
  double fitted_decay_rate = 0.0;  // mean over runs that stayed locked, per unit τ
  bool escaped = false;
  double floor = 0.0;              // tolerance + truncation bound for the distance
  double linearized_rate = 0.0;    // real part of the linearized eigenvalue, per unit τ
  double wkb_real_part = 0.0;      // same for the WKB formula, per unit τ
};

StabilityReport stability_experiment(const Params& p, double theta_lo, double theta_hi,
                                     double perturbation, const StabilityOptions& opt = {});

struct FastMotionReport {
  double f = 0.0, delta = 0.0, z0 = 0.0, tau0 = 0.0;
  double xi_match = 0.0;
  double p_match = 0.0, s_match = 0.0;
  double E0_match = 0.0;
  bool running_phase = false;
  bool s_monotone = false;
  double s_end = 0.0, xi_end = 0.0;
  double shadow_window = 1.0;
  double shadow_max_ds = 0.0, shadow_max_dp = 0.0;
  double coefficient_fit = 0.0;    // c in s' = c√(E₀ + s − sin s)
  double coefficient_expected = 0.0; // 2f
  double zero_data_drift = 0.0;
  std::vector<std::array<double, 4>> segment; // ξ, p, s, E₀
};

FastMotionReport fast_motion_transition(const Params& p, double z0, double shadow_window = 1.0,
                                        double xi_after = 6.0,
                                        const IntegratorConfig& cfg = capture_config());

struct DuffingOptions {
  int samples_per_period = 64;
  double max_detuning = 0.4;
  double linear_max_detuning = 0.05; // window for the c = 0 control
  bool sign_experiment = true;
  bool linear_control = true;
  IntegratorConfig cfg;
};

struct EnvelopeComparison {
  double c = 0.0;
  double T_lo = 0.0, T_hi = 0.0;
  double rms_amplitude = 0.0; // relative RMS of |Ψ_est| − |Ψ|
  double rms_complex = 0.0;   // relative RMS of Ψ_est − Ψ
  std::size_t points = 0;
  double T_escape = -1.0;     // first T with |u| beyond the softening well, or −1
};

struct DuffingReport {
  DuffingParams dp;
  double f = 0.0, delta = 0.0;
  double t_max = 0.0;
  EnvelopeComparison main;
  std::vector<EnvelopeComparison> sign_runs; // −c and the printed −2√2
  bool sign_confirmed = false; // the default c beats every alternative
  bool has_linear = false;
  EnvelopeComparison linear; // c = 0 against the quadrature oracle
};

/// Demodulate u(t) of the chirped Duffing oscillator into Ψ_est(T) and
/// compare with the complex form at the mapped (f, δ).
DuffingReport duffing_validation(const DuffingParams& dp, double t_max, const DuffingOptions& opt = {});

/// −if∫₀^T exp(i(T² − s²)/2 − δ(T − s)) ds, the response of the linearized
/// complex form.
std::complex<double> linear_response(double T, double f, double delta);

struct EquivalenceReport {
  double max_rel_R = 0.0;      // complex vs polar
  double tau_lo = 0.0, tau_hi = 0.0;
  double max_rescaled = 0.0;   // complex vs rescaled form, ψ scale
  double rescaled_tol = 0.0;
  double theta_lo = 0.0, theta_hi = 0.0;
};

/// Integrate the same initial data in the complex and polar forms over the
/// pre-break window, and in the complex and rescaled forms over a short arc.
EquivalenceReport representation_equivalence(const Params& p, double tau_hi, double arc,
                                              const IntegratorConfig& cfg);

} // namespace autores
