#pragma once

// Vector fields of the primary resonance equation in its complex, polar and
// rescaled forms, the chirped Duffing oscillator and the fast-motion system.

#include "autores/core.hpp"
#include "autores/integrate.hpp"

#include <array>
#include <string>

namespace autores {

using Vec2 = std::array<double, 2>;

/// Ψ' = i(τ − |Ψ|²)Ψ − δΨ − if, state (Re Ψ, Im Ψ).
Vec2 rhs_complex_pr(double tau, const Vec2& psi, const Params& p);

/// R' = −δR − f sin φ, φ' = τ − R² − (f/R) cos φ. Throws DomainError for R ≤ 0.
Vec2 rhs_polar_pr(double tau, const Vec2& rphi, const Params& p);

/// ψ' = iδ⁻⁴(θ − |ψ|²)ψ − δ⁻¹ψ − iδ⁻¹f.
Vec2 rhs_rescaled_pr(double theta, const Vec2& psi, const Params& p);

/// (u, u') ↦ (u', −u − b u' + c u³ + εA cos(t − αt²/2)).
Vec2 rhs_duffing(double t, const Vec2& state, const DuffingParams& dp);

/// (p, s) ↦ (−f(1 − cos s), −2f p).
Vec2 rhs_fast_motion(double xi, const Vec2& ps, const Params& p);

/// E₀ = p² + sin s − s, conserved by rhs_fast_motion.
double fast_motion_energy(const Vec2& ps);

enum class ModelSystem { ComplexPR, PolarPR, RescaledPR, Duffing, FastMotion };

std::string to_string(ModelSystem s);
std::size_t dimension(ModelSystem s);

VectorField vector_field(ModelSystem s, const Params& p);
VectorField vector_field(const DuffingParams& dp);

} // namespace autores
