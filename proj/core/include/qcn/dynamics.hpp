// dynamics.hpp: master-equation right-hand side, time evolution, steady
// states and the input–output observables built on them.

#pragma once

#include "qcn/hilbert.hpp"
#include "qcn/integrator.hpp"
#include "qcn/model.hpp"
#include "qcn/pulse.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace qcn {

/// Generator with the static parts pre-combined, ready for repeated RHS calls:
/// H_eff = H − (i/2) Σ Γ O†O for every constant-rate channel.
class CompiledGenerator {
 public:
  explicit CompiledGenerator(const GeneratorBundle& bundle);

  /// out = dρ/dt at time t. Valid for any square ρ of the layout dimension.
  void apply(const DenseMat& rho, double t, DenseMat& out) const;

  std::size_t dim() const noexcept { return dim_; }

 private:
  struct Jump {
    SparseMat op, op_dag;
  };
  struct ScheduledJump {
    RateSchedule rate;
    SparseMat op, op_dag, op_dag_op;
  };
  struct Link {
    RateSchedule coupling;
    SparseMat src, src_dag, sink, sink_dag, sink_dag_src, src_dag_sink;
  };

  std::size_t dim_;
  SparseMat h_eff_;
  SparseMat h_eff_dag_;
  std::vector<Jump> jumps_;
  std::vector<ScheduledJump> scheduled_;
  std::vector<Link> links_;
  std::function<QuantumOperator(double)> h_schedule_;
};

/// dρ/dt = −i[H(t), ρ] + Σ 𝓛{Γ,O}ρ + Σ c(t)([src ρ, sink†] + [sink, ρ src†])
DenseMat lindblad_rhs(const DensityMatrix& rho, const GeneratorBundle& bundle, double t);

/// Column-stacked Liouvillian: vec(dρ/dt) = L vec(ρ). Time-independent bundles only.
SparseMat superoperator(const GeneratorBundle& bundle);

struct Observable {
  std::string name;
  QuantumOperator op;
};

struct EvolveOptions {
  double rtol{1e-8};
  double atol{1e-10};
  double max_step{std::numeric_limits<double>::infinity()};
  double trace_tolerance{1e-6};
  /// Records the smallest eigenvalue of ρ over the output samples (costly).
  bool track_positivity{false};
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<std::string> names;
  /// values[i][j]: observable j at times[i]
  std::vector<std::vector<double>> values;
  double trace_drift{0.0};
  std::optional<double> min_eigenvalue;
  DensityMatrix final_rho;
  OdeStats stats;

  std::vector<double> column(const std::string& name) const;
};

/// Adaptive Dormand–Prince integration; ρ is re-symmetrized after every
/// accepted step. Throws ErrorCategory::solver on step underflow or when the
/// trace drifts by more than opts.trace_tolerance.
EvolutionResult evolve(const DensityMatrix& rho0, const GeneratorBundle& bundle,
                       const std::vector<double>& t_grid, const std::vector<Observable>& observables,
                       const EvolveOptions& opts = {});

/// n evenly spaced points from t0 to t1 inclusive.
std::vector<double> linear_grid(double t0, double t1, std::size_t n);

enum class SteadyMethod { nullspace, long_time };

std::string to_string(SteadyMethod method);

struct SteadyStateResult {
  DensityMatrix rho;
  /// ||L ρ||_F
  double residual{0.0};
  SteadyMethod method{SteadyMethod::nullspace};
  /// 1-norm condition estimate of the trace-constrained Liouvillian.
  double condition_estimate{0.0};
};

struct SteadyOptions {
  double condition_threshold{1e12};
  /// Long-time fallback integrates to factor / (smallest nonzero rate).
  double long_time_factor{100.0};
  double long_time_rtol{1e-10};
  bool force_long_time{false};
};

/// Solves L vec(ρ) = 0 with one row replaced by tr ρ = 1. Falls back to long-time
/// integration when the system is ill-conditioned; reports (throws
/// ErrorCategory::solver) a non-unique steady state instead of picking one.
SteadyStateResult steady_state(const GeneratorBundle& bundle, const SteadyOptions& opts = {});

struct Transmittance {
  std::optional<double> T_a;
  std::optional<double> T_b;
};

/// T_a = κ_ex,2⟨a†a⟩/|α|², T_b = κ_ex,4⟨b†b⟩/|β|²; absent for a zero drive.
Transmittance transmittance_steady(const SteadyStateResult& ss, const QcnParams& params,
                                   const Frame& frame = Frame::lab());

struct SteadyObservables {
  std::optional<double> T_a;
  std::optional<double> T_b;
  double sigma22{0.0};
  double sigma33{0.0};
  double n_a{0.0};
  double n_b{0.0};
};

SteadyObservables steady_observables(const SteadyStateResult& ss, const QcnParams& params,
                                     const Frame& frame = Frame::lab());

// Observable names recorded by cascade runs.
inline constexpr const char* kObsNd1 = "n_d1";
inline constexpr const char* kObsNa = "n_a";
inline constexpr const char* kObsNb = "n_b";
inline constexpr const char* kObsXd1a = "x_d1_a";  // ⟨d1†a + a†d1⟩
inline constexpr const char* kObsBx = "b_x";       // ⟨b + b†⟩
inline constexpr const char* kObsBy = "b_y";       // ⟨−i(b − b†)⟩
inline constexpr const char* kObsNd2 = "n_d2";
inline constexpr const char* kObsXd2b = "x_d2_b";  // ⟨d2†b + b†d2⟩
inline constexpr const char* kObsS22 = "sigma22";
inline constexpr const char* kObsS33 = "sigma33";

std::vector<Observable> cascade_observables(const LayoutPtr& layout, ProbeMode mode);

/// Instantaneous fluxes of a cascade run, derived from the recorded observables.
struct CascadeFluxes {
  std::vector<double> times;
  std::vector<double> signal_in;   // ⟨d1,out† d1,out⟩
  std::vector<double> signal_out;  // ⟨a_r† a_r⟩ including the d1/a cross terms
  std::vector<double> signal_transmitted;  // κ_ex,2⟨a†a⟩
  std::vector<double> probe_in;
  std::vector<double> probe_out;   // κ_ex,4⟨b†b⟩
  std::vector<double> probe_reflected;
};

CascadeFluxes cascade_fluxes(const EvolutionResult& run, const QcnParams& params,
                             const CascadeSpec& spec, const PulseSchedule& schedule);

struct PulseMetrics {
  std::optional<double> T_a;
  std::optional<double> R_a;
  /// Probe quantities normalized by the probe input over the same window.
  std::optional<double> T_b;
  std::optional<double> R_b;
  double input_photons{0.0};
};

/// Trapezoidal integrals of the fluxes over [t0, t1]. Signal metrics are absent
/// when no photon is injected. Throws ErrorCategory::domain when more than 0.1%
/// of the packet energy lies outside the window.
PulseMetrics pulse_metrics(const EvolutionResult& run, const QcnParams& params,
                           const CascadeSpec& spec, const PulseSchedule& schedule, double t0,
                           double t1);

/// ∫ f dt over samples with t in [t0, t1].
double trapezoid(const std::vector<double>& t, const std::vector<double>& f, double t0, double t1);

}  // namespace qcn
