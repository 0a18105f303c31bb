// model.hpp: physical parameters and generator assembly for the driven
// emitter–two-cavity system and its cascaded (source-cavity) extension.
//
// Conventions: rates are in units of a reference rate κ and times in 1/κ.
// Dissipators use 𝓛{Γ,O}ρ = (Γ/2)(2OρO† − O†Oρ − ρO†O), so Γ is a population
// decay rate. The coherent drive H_D = i√κ_ex,1(α*a − αa†) + i√κ_ex,3(β*b − βb†)
// enters the Heisenberg equations as ȧ = … − √κ_ex,1 α, paired with the output
// relation a_out = a_in + √κ a.

#pragma once

#include "qcn/hilbert.hpp"
#include "qcn/pulse.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qcn {

struct QcnParams {
  double g1{0.1};
  double g2{0.1};
  /// κ_ex,1..4: M1/M2 couple cavity a, M3/M4 couple cavity b. M1 and M3 are the input ports.
  std::array<double, 4> kappa_ex{0.5, 0.5, 0.5, 0.5};
  double kappa_in_a{0.0};
  double kappa_in_b{0.0};
  double gamma21{0.01};
  double gamma31{0.01};
  /// Cavity–drive detunings Δ₁, Δ₂.
  double delta1{0.0};
  double delta2{0.0};
  /// Cavity–transition detunings Δ_a, Δ_b.
  double delta_a{0.0};
  double delta_b{0.0};
  /// Drive amplitudes; |α|² is the input photon flux.
  cplx alpha{0.0, 0.0};
  cplx beta{0.0, 0.0};

  double kappa_a() const noexcept { return kappa_ex[0] + kappa_ex[1] + kappa_in_a; }
  double kappa_b() const noexcept { return kappa_ex[2] + kappa_ex[3] + kappa_in_b; }
  /// Δ₃ = Δ_a + Δ₁ (derived, never set directly)
  double delta3() const noexcept { return delta_a + delta1; }
  /// Δ₄ = Δ_b + Δ₂
  double delta4() const noexcept { return delta_b + delta2; }

  /// Relabels a↔b: swaps couplings, mirror rates, losses, detunings and drives.
  QcnParams swapped() const;

  /// Symmetric cavities, κ_a = κ_b = 1, γ = 0.01, g = 0.1, all resonant.
  static QcnParams fig2(double alpha2 = 0.0, double beta2 = 0.0);
  /// Single-sided a (κ_ex,1 = 1, κ_ex,2 = 0), symmetric b (0.5, 0.5), |β|² = 10⁻².
  static QcnParams fig4();
};

struct Diagnostics {
  std::vector<std::string> warnings;
  bool empty() const noexcept { return warnings.empty(); }
};

/// Hard errors (ErrorCategory::domain) on negative rates, non-finite values or a
/// cavity with no loss. Warnings when the QND regime γ₂₁, κ_in,a ≪ κ_a is left
/// (threshold 0.1 κ_a).
Diagnostics validate(const QcnParams& params);

/// Coherent displacement of the cavity fields, a = ã + μ_a. The master equation
/// is rewritten exactly for ã; choosing μ as the empty-cavity amplitude keeps
/// the residual field small so strong drives need only a few Fock levels.
struct Frame {
  cplx mu_a{0.0, 0.0};
  cplx mu_b{0.0, 0.0};

  static Frame lab() { return {}; }
  /// μ = −√κ_ex,in · drive / (κ/2 + iΔ) for each cavity.
  static Frame displaced(const QcnParams& params);

  bool is_lab() const noexcept { return mu_a == cplx{} && mu_b == cplx{}; }
  cplx shift(Subsystem s) const noexcept;
};

/// Lab-frame annihilation operator expressed in the frame: a = ã + μ_a·1.
QuantumOperator lab_field(const LayoutPtr& layout, Subsystem s, const Frame& frame);
/// Lab-frame photon number (ã + μ)†(ã + μ).
QuantumOperator lab_number(const LayoutPtr& layout, Subsystem s, const Frame& frame);

using RateSchedule = std::function<double(double)>;

struct LindbladTerm {
  double rate{0.0};
  QuantumOperator op;
  /// When set, overrides `rate` with a time-dependent value.
  RateSchedule schedule{};
  std::string name{};

  bool time_dependent() const noexcept { return static_cast<bool>(schedule); }
  double rate_at(double t) const { return schedule ? schedule(t) : rate; }
};

/// Unidirectional coupling of an upstream mode into a downstream one:
/// c(t)([src ρ, sink†] + [sink, ρ src†]) with c(t) = √(κ_src(t) κ_sink).
struct NetworkTerm {
  RateSchedule coupling;
  QuantumOperator source;
  QuantumOperator sink;
  std::string name{};
};

struct GeneratorBundle {
  QuantumOperator h_static;
  /// Optional time-dependent addition to the Hamiltonian.
  std::function<QuantumOperator(double)> h_schedule{};
  std::vector<LindbladTerm> lindblad;
  std::vector<NetworkTerm> network;

  const LayoutPtr& layout() const noexcept { return h_static.layout_ptr(); }
  bool time_independent() const;
};

/// Δ₁a†a + Δ₂b†b + Δ₃σ₂₂ + Δ₄σ₃₃ + g₁(σ₂₁a + a†σ₁₂) + g₂(σ₃₁b + b†σ₁₃)
QuantumOperator build_h_qcn(const QcnParams& params, const LayoutPtr& layout,
                            const Frame& frame = Frame::lab());

/// i√κ_ex,1(α*a − αa†) + i√κ_ex,3(β*b − βb†)
QuantumOperator build_h_drive(const QcnParams& params, const LayoutPtr& layout,
                              const Frame& frame = Frame::lab());

/// {κ_a: a, κ_b: b, γ₂₁: σ₁₂, γ₃₁: σ₁₃}
std::vector<LindbladTerm> collapse_terms(const QcnParams& params, const LayoutPtr& layout);

/// Generator of the classically driven system. In a displaced frame the
/// dissipators act on the residual fields and contribute the compensating
/// Hamiltonian (iκ/2)(μ*ã − μã†).
GeneratorBundle build_system(const QcnParams& params, const LayoutPtr& layout,
                             const Frame& frame = Frame::lab());

enum class ProbeMode { classical_drive, cascaded_source };

std::string to_string(ProbeMode mode);
ProbeMode probe_mode_from_string(const std::string& name);

struct CascadeSpec {
  /// Photons loaded in the signal source cavity.
  int n_s{1};
  /// Cap on the signal source output coupling κ_d1,ex2(t).
  double kappa_d1_ex2_max{20.0};
  PulseSpec pulse{PulseShape::gaussian, 2.0 * 3.14159265358979323846 * 150.0,
                  2.0 * 3.14159265358979323846 * 6.0};
  ProbeMode probe_mode{ProbeMode::classical_drive};
  /// Constant output rate of the probe source cavity (cascaded probe only).
  double kappa_d2{1.0};
};

/// Signal source d1 feeds cavity a through port 1; with a cascaded probe, source
/// d2 (a coherently pumped cavity whose output amplitude equals β) feeds cavity b
/// through port 3. With a classical probe the β drive term of H_D is kept and d2
/// is absent.
GeneratorBundle build_cascaded(const QcnParams& params, const CascadeSpec& spec,
                               const PulseSchedule& schedule, const LayoutPtr& layout);

/// Initial state of a cascaded run: emitter in |1⟩, cavities empty, d1 in |n_s⟩.
DensityMatrix cascaded_initial_state(const CascadeSpec& spec, const LayoutPtr& layout);

/// Collapse terms of the cascaded model: the four system channels plus the
/// source-cavity decays (κ_d1(t) on d1, κ_d2 on d2 when present).
std::vector<LindbladTerm> collapse_terms(const QcnParams& params, const CascadeSpec& spec,
                                         const PulseSchedule& schedule, const LayoutPtr& layout);

}  // namespace qcn
