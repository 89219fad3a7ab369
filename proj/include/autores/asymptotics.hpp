#pragma once

// Asymptotic solutions of the rescaled equation in the outer, intermediate
// and Painlevé regions, and the break predictions built from them.

#include "autores/core.hpp"
#include "autores/painleve.hpp"

#include <array>
#include <complex>
#include <string>
#include <utility>

namespace autores {

enum class OuterBranch { Attracting, Repelling }; // sign of cos α₀: −1, +1
enum class ThirdOrderForm { Derived, Printed };

std::string to_string(OuterBranch b);

struct OuterOptions {
  int k_max = 2;
  bool third_order = false; // k_max = 3 is refused unless set
  ThirdOrderForm third_order_form = ThirdOrderForm::Derived;
  double validity = 0.1;    // require δ/(f² − θ) < validity
  OuterBranch branch = OuterBranch::Attracting;
};

struct OuterCoefficients {
  std::array<double, 4> alpha{};
  std::array<double, 4> rho{};
};

/// ψ = R e^{iφ} with R = √θ + δ³Σδᵏρ_k(θ), φ = Σδᵏα_k(θ), 0 < θ < f².
class OuterSeries {
public:
  OuterSeries(const Params& p, OuterOptions opt = {});

  const Params& params() const { return p_; }
  const OuterOptions& options() const { return opt_; }

  bool in_domain(double theta) const;
  /// All coefficients up to k = 3 regardless of k_max; no domain check
  /// beyond 0 < θ < f².
  OuterCoefficients coefficients(double theta) const;
  /// ρ(θ, δ) and α(θ, δ) truncated at k_max.
  double rho(double theta) const;
  double alpha(double theta) const;
  /// (θ, R, φ) in the ψ scale. Throws DomainError outside the validity domain.
  PolarState evaluate(double theta) const;
  /// Size of the first omitted terms in R and φ.
  std::pair<double, double> truncation_error(double theta) const;

private:
  void check(double theta) const;
  Params p_;
  OuterOptions opt_;
};

PolarState outer_solution(double theta, const Params& p, int k_max, OuterOptions opt = {});

/// |iδ⁴ψ' + (θ − |ψ|²)ψ + iδ³ψ − δ³f| for the truncated outer series, with
/// ψ' from Richardson-extrapolated central differences. No domain check.
double outer_residual(const OuterSeries& s, double theta);

/// Fitted order of outer_residual at θ between δ₁ and δ₂ (δ₂ < δ₁).
double outer_residual_order(double f, double theta, double delta1, double delta2, OuterOptions opt);

struct IntermediateOptions {
  int k_max = 1;          // 0: leading, 1: O(δ), 2: O(δ²)
  double validity = 0.1;  // require δ/(−1 − η) < validity
  int q = 2;
  int sigma = -1;
};

struct IntermediateValue {
  double eta = 0.0;
  double r = 0.0;
  double a = 0.0;
};

/// θ = f² + δη, R = f + δr, φ = 3π/2 + √δ·a with
/// r = η/(2f) − δη²/(8f³) + δ²η³/(16f⁵), a = a₀ + δa₂ + δ²a₄,
/// a₀ = σ√((−1−η)/f^q).
class IntermediateSeries {
public:
  IntermediateSeries(const Params& p, IntermediateOptions opt = {});

  const Params& params() const { return p_; }
  const IntermediateOptions& options() const { return opt_; }
  bool in_domain(double eta) const;
  IntermediateValue evaluate(double eta) const;
  /// (θ, R, φ) in the ψ scale.
  PolarState polar(double eta) const;

private:
  Params p_;
  IntermediateOptions opt_;
};

IntermediateValue intermediate_solution(double eta, const Params& p, int k_max,
                                        IntermediateOptions opt = {});

/// Residual of the amplitude equation δR_θ + R + f sin φ = 0 for the
/// truncated intermediate series.
double intermediate_residual(const IntermediateSeries& s, double eta);

struct BranchChoice {
  int q = 2;
  int sigma = -1;
  std::array<double, 4> rms{}; // (q, σ) = (1,+1), (1,−1), (2,+1), (2,−1)
  double theta_lo = 0.0, theta_hi = 0.0;
};

/// Pick (q, σ) by comparing the leading intermediate phase with the outer
/// phase over θ ∈ [theta_lo, theta_hi].
BranchChoice select_intermediate_branch(const Params& p, double theta_lo, double theta_hi,
                                        std::size_t points = 64);

struct Prediction {
  double theta_star = 0.0;     // f² − δ + δ²τ₀
  double tau_star = 0.0;       // f²/δ²
  double tau_star_refined = 0.0; // θ*/δ²
  double R_star_psi = 0.0;     // f − δ/(2f)
  double R_star_Psi = 0.0;
  double z0_used = 0.0;
  double tau0 = 0.0;           // inner pole μz₀ − 1/(4f²)
  double theta_star_printed_scale = 0.0; // with f²z₀/6 in place of μz₀
};

/// Throws DomainError when δτ₀ ≥ 1, where the refined break would not
/// precede f².
Prediction predict(const Params& p, double z0);

/// ±i√2((f² − θ)θ)^{1/4}δ^{1/2} − δ/2.
std::pair<std::complex<double>, std::complex<double>> wkb_eigenvalues(double theta, const Params& p);

/// Eigenvalues of the polar system linearized at the leading locked state
/// (R = √θ/δ, φ = α₀), per unit τ multiplied by δ to match wkb_eigenvalues.
std::pair<std::complex<double>, std::complex<double>> linearized_eigenvalues(double theta,
                                                                             const Params& p);

/// Angular frequency of small oscillations about the locked state, per unit τ.
double lock_frequency(double theta, const Params& p);

struct InnerValue {
  double tau = 0.0;
  double u = 0.0;
  double v = 0.0;
};

/// u₀ = κ y(z), z = (τ + 1/(4f²))/μ, 2f v₀ = −u₀' + (τ − 1/(4f²))/(2f²).
/// Throws when √δ/|τ − τ₀| ≥ validity or z leaves the P1 solution.
InnerValue painleve_region_solution(double tau_inner, const Params& p, const MatchCalibration& calib,
                                    const Painleve1Solution& sol, double validity = 0.1);

} // namespace autores
