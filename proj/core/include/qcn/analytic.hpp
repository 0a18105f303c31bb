// analytic.hpp: closed-form steady-state transmissions and excited-state
// populations of the resonantly driven V-type emitter in two cavities.
//
// Valid at resonance (all detunings zero) with symmetric mirrors on each cavity
// and in the weak-driving regime. The formulas are evaluated as stated; the
// validity domain is enforced by from_params() rather than extrapolated.

#pragma once

#include "qcn/model.hpp"

namespace qcn::analytic {

struct AnalyticInputs {
  double g1{0.1};
  double g2{0.1};
  double kappa_a{1.0};
  double kappa_b{1.0};
  double gamma21{0.01};
  double gamma31{0.01};
  /// Input photon fluxes |α|², |β|².
  double alpha2{0.0};
  double beta2{0.0};

  /// Throws ErrorCategory::domain off resonance, with asymmetric mirrors or
  /// negative rates.
  static AnalyticInputs from_params(const QcnParams& params);

  AnalyticInputs swapped() const;
};

/// Γ_A = γ₂₁ + 4g₁²/κ_a
double gamma_A(const AnalyticInputs& in);
/// Γ_B = γ₃₁ + 4g₂²/κ_b
double gamma_B(const AnalyticInputs& in);
/// 𝒟 = Γ_AΓ_Bκ_aκ_b + 16(g₁²κ_b|α|² + g₂²κ_a|β|²)
double denominator(const AnalyticInputs& in);

struct Pair {
  double a{0.0};
  double b{0.0};
};

/// T_a = 1 − 8g₁²(κ_b/κ_a)(γ₂₁κ_a + 2g₁²)/𝒟 and its b counterpart. Raw values,
/// no clamping. Throws ErrorCategory::domain when 𝒟 = 0.
Pair transmissions(const AnalyticInputs& in);

/// ⟨σ₂₂⟩ = 8g₁²κ_b|α|²/𝒟, ⟨σ₃₃⟩ = 8g₂²κ_a|β|²/𝒟
Pair populations(const AnalyticInputs& in);

/// Bare-cavity photon numbers ⟨a†a⟩ ≈ 2|α|²/κ_a, ⟨b†b⟩ ≈ 2|β|²/κ_b.
Pair bare_cavity_photons(const QcnParams& params);

}  // namespace qcn::analytic
