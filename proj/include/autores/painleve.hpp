#pragma once

// The Painlevé-1 transcendent y'' = 6y² + z selected by its algebraic
// behaviour as z → −∞, its first real pole, and the constants that match it
// to the inner region of the primary resonance equation.

#include "autores/core.hpp"
#include "autores/integrate.hpp"

#include <string>
#include <utility>
#include <vector>

namespace autores {

enum class P1Branch { Negative, Positive }; // sign of y ~ ±√(−z/6)

std::string to_string(P1Branch b);

struct SeedOptions {
  P1Branch branch = P1Branch::Negative;
  int terms = 4;       // corrections c_k x^{−5k/2}, 0..4
  double z_min = 50.0; // seeding needs z ≤ −z_min
};

/// (y, y') from y = ±√(x/6)(1 + Σ c_k x^{−5k/2}), x = −z.
std::pair<double, double> seed_asymptotic(double z, const SeedOptions& opt = {});

/// Integrator settings used for P1 unless the caller overrides them.
IntegratorConfig p1_default_config();

struct Painleve1Solution {
  Trajectory traj{2}; // z ↦ (y, y')
  double z_seed = 0.0;
  double z_end = 0.0;
  SeedOptions seed;
  IntegratorConfig cfg;
  bool blew_up = false;
  double z0 = 0.0;     // filled by locate_first_pole
  double z0_err = 0.0;
  double pole_order = 0.0;

  double y(double z) const { return dense_eval(traj, z)[0]; }
  double yprime(double z) const { return dense_eval(traj, z)[1]; }
};

/// Integrate P1 from the asymptotic seed at z_start toward z_end, stopping at
/// the first blow-up.
Painleve1Solution solve_p1(double z_start, double z_end, const IntegratorConfig& cfg = p1_default_config(),
                           const SeedOptions& seed = {});

struct PoleEstimate {
  double z0 = 0.0;
  double z0_err = 0.0;
  double order = 0.0;        // fitted exponent of y ~ (z − z0)^order
  double z0_coarse = 0.0;    // estimate from sol itself
  double z0_refined = 0.0;   // estimate after re-integration at tolerance/100
};

/// Fits 1/√y linearly in z near the blow-up, then re-integrates with both
/// tolerances divided by 100; z0_err is the difference of the two estimates.
PoleEstimate locate_first_pole(const Painleve1Solution& sol);

/// Solve and locate in one go, storing the estimate in the solution.
Painleve1Solution first_pole_solution(double z_seed = -100.0,
                                      const IntegratorConfig& cfg = p1_default_config(),
                                      const SeedOptions& seed = {});

/// max |y'' − 6y² − z| / max(1, 6y² + |z|) with y'' from the dense output
/// of y', at the accepted samples or at the step midpoints.
double p1_defect(const Painleve1Solution& sol, bool midpoints = false);

/// The inner-region scale τ + 1/(4f²) = μz, μ = (6/f²)^{1/5}, u₀ = μ³y.
double p1_time_scale(const Params& p);
double p1_amplitude_scale(const Params& p);
double inner_pole(const Params& p, double z0);

struct CandidateFit {
  std::string name;
  double kappa = 0.0;
  double z_scale = 0.0; // z = (τ + 1/(4f²))/z_scale
  double rms = 0.0;
};

struct MatchCalibration {
  double kappa = 0.0; // u₀ ≈ κ·y(z)
  int sigma = -1;     // sign of κ
  int q = 2;          // a₀ = σ√((−1−η)/f^q)
  double mu = 0.0;    // z = (τ + 1/(4f²))/μ
  double rms_mismatch = 0.0;
  double threshold = 0.05;
  bool ok = false;
  double tau_lo = 0.0, tau_hi = 0.0;
  std::size_t points = 0;
  std::vector<CandidateFit> candidates;
};

struct CalibrationOptions {
  double threshold = 0.05;
  double window_lo = -6.0;   // relative to the inner pole τ₀
  double window_gap = 10.0;  // window ends at τ₀ − window_gap·√δ
  std::size_t points = 400;
  int q = 2;
};

/// Least-squares fit of κ in u(τ) ≈ κ·y((τ + 1/(4f²))/μ) from sampled
/// inner-region data (τ inner, u). Printed candidates are evaluated on the
/// same samples.
MatchCalibration calibrate_samples(const Params& p, const std::vector<double>& tau_inner,
                                   const std::vector<double>& u, const Painleve1Solution& sol,
                                   const CalibrationOptions& opt = {});

/// Same fit with u extracted from a Ψ-scale trajectory of the complex form.
MatchCalibration calibrate(const Params& p, const Trajectory& capture, const Painleve1Solution& sol,
                           const CalibrationOptions& opt = {});

} // namespace autores
