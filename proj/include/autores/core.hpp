#pragma once

// Domain types shared by every module: physical parameters, envelope states
// and the change-of-scale chain used by the asymptotic regions.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace autores {

/// Raised when an argument lies outside the domain where an operation is defined.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Parameters (f, δ) of the primary resonance equation
///   iΨ' + (τ − |Ψ|²)Ψ + iδΨ = f.
///
/// The constructor requires 0 < δ < f; see control() for degenerate runs.
class Params {
public:
  Params(double f, double delta);

  /// Finite, nonnegative values only; used by experiments with δ = 0 or f = 0.
  static Params control(double f, double delta);

  double f() const { return f_; }
  double delta() const { return delta_; }

private:
  struct Unchecked {};
  Params(double f, double delta, Unchecked) : f_(f), delta_(delta) {}

  double f_;
  double delta_;
};

/// Chirped, damped Duffing oscillator
///   u'' + u + b u' − c u³ = εA cos(t − αt²/2).
/// Envelope time is T = 2ε^{2/3}t and u ≈ (ε^{1/3}/√2)(Ψe^{iχ} + c.c.).
struct DuffingParams {
  double eps = 0.0;
  double b = 0.0;
  double A = 0.0;
  double c = 8.0 / 3.0;
  std::optional<double> alpha; // chirp rate override

  double chirp_rate() const;
  /// dT/dt of the slow time used by the envelope.
  double slow_rate() const;
  /// Scale factor between u and the complex envelope: u ≈ amplitude_scale()·2Re(Ψe^{iχ}).
  double amplitude_scale() const;
  /// Drive phase χ(t) = t − αt²/2.
  double drive_phase(double t) const;
  /// Instantaneous drive frequency 1 − αt.
  double drive_frequency(double t) const;
};

/// (ε, b, A) ↦ (f, δ) with f = A/(4√2), δ = ε^{−2/3} b/4.
Params map_duffing_params(const DuffingParams& dp);

struct EnvelopeState {
  double time = 0.0;
  std::complex<double> psi;
};

/// Amplitude and unwrapped phase of the envelope.
struct PolarState {
  double time = 0.0;
  double R = 0.0;
  double phi = 0.0;
};

EnvelopeState polar_to_complex(const PolarState& s);

/// R = |ψ|, φ = arg ψ moved onto the 2π-branch nearest prev_phi when given.
/// A zero envelope has no phase: throws unless carry_phase is set and prev_phi
/// is available, in which case φ = prev_phi.
PolarState complex_to_polar(const EnvelopeState& s,
                            std::optional<double> prev_phi = std::nullopt,
                            bool carry_phase = false);

/// Shift an angle by a multiple of 2π so it lies within π of reference.
double unwrap_near(double angle, double reference);

enum class Scale {
  Tau,      // τ, Ψ
  Theta,    // θ = τδ², ψ = δΨ
  Eta,      // η = (θ − f²)/δ, ψ
  InnerTau, // τ_in = (η + 1)/δ, ψ
  Xi,       // ξ = (θ − f² + δ − δ²τ₀)/δ^{5/2}, ψ
};

std::string to_string(Scale s);
Scale scale_from_string(const std::string& name);

/// Reference data for the scale chain. inner_pole is τ₀, the pole of the
/// inner solution, which fixes the origin of ξ.
struct ScaleFrame {
  Params params;
  double inner_pole = 0.0;
};

/// Independent variable in the Θ scale from any scale, and back.
double to_theta(double time, Scale from, const ScaleFrame& frame);
double from_theta(double theta, Scale to, const ScaleFrame& frame);

/// Transform time and envelope between scales. Only τ ↔ θ rescales the
/// envelope (ψ = δΨ); the near-break scales keep ψ and only stretch time.
EnvelopeState convert_scale(const EnvelopeState& state, Scale from, Scale to,
                            const ScaleFrame& frame);

// Region variables near the break. All take the ψ-scale amplitude R and a
// phase already moved onto the branch where the locked phase sits near 3π/2.

/// θ = f² + δη, R = f + δr, φ = 3π/2 + √δ·a.
struct IntermediateVars {
  double eta = 0.0;
  double r = 0.0;
  double a = 0.0;
};

/// θ = f² − δ + δ²τ, a = √δ·u, r = −1/(2f) + δ(4f²τ − 1)/(8f³) + δ²v.
struct InnerVars {
  double tau = 0.0;
  double u = 0.0;
  double v = 0.0;
};

/// ξ as in Scale::Xi, s = φ − 3π/2,
/// p = (R − f + δ/(2f) − δ²(4f²τ₀ − 1)/(8f³))/δ^{3/2}.
struct FastVars {
  double xi = 0.0;
  double p = 0.0;
  double s = 0.0;
};

IntermediateVars to_intermediate(double theta, double R, double phi, const Params& p);
InnerVars to_inner(double theta, double R, double phi, const Params& p);
FastVars to_fast(double theta, double R, double phi, const ScaleFrame& frame);

/// Inverse maps, returning (θ, R, φ) in the ψ scale.
PolarState from_intermediate(const IntermediateVars& v, const Params& p);
PolarState from_inner(const InnerVars& v, const Params& p);
PolarState from_fast(const FastVars& v, const ScaleFrame& frame);

} // namespace autores
