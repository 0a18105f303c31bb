// scenarios.hpp: steady-state sweeps, pulsed detection runs and the ⁸⁷Rb
// parameter preset.
//
// Sweeps fan out one task per grid cell over config.jobs worker threads; the
// results keep grid order whatever the completion order.

#pragma once

#include "qcn/analytic.hpp"
#include "qcn/dynamics.hpp"
#include "qcn/experiments/config.hpp"
#include "qcn/experiments/truncation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcn::experiments {

/// One steady-state solve with its closed-form counterpart.
struct SteadyPoint {
  double alpha2{0.0};
  double beta2{0.0};
  SteadyObservables numeric{};
  /// Closed forms, present when the parameters are resonant with symmetric mirrors.
  std::optional<analytic::Pair> T_analytic{};
  std::optional<analytic::Pair> populations_analytic{};
  TruncationReport truncation{};
  double residual{0.0};
  SteadyMethod method{SteadyMethod::nullspace};
};

/// Solves the steady state of `params` with config's frame, truncation and
/// tolerances.
SteadyPoint solve_steady_point(const RunConfig& config, const QcnParams& params);

SteadyPoint run_steady(const RunConfig& config);

/// Cell observables on a log grid of drive powers.
struct SweepTable {
  std::vector<double> alpha2;
  std::vector<double> beta2;
  /// Row-major: cells[i * beta2.size() + j] at (alpha2[i], beta2[j]).
  std::vector<SteadyPoint> cells;

  const SteadyPoint& at(std::size_t i, std::size_t j) const { return cells[i * beta2.size() + j]; }
};

/// Grid over config.alpha2_axis × config.beta2_axis. Cell failures are rethrown
/// with the cell coordinates.
SweepTable run_sweep2d(const RunConfig& config);

struct Fig2Result {
  SweepTable grid;
  /// T_a along the α axis, one run per entry of config.cut_beta2 (β-major).
  std::vector<SteadyPoint> cuts;
};

Fig2Result run_fig2(const RunConfig& config);

struct Fig3Result {
  /// β = 0 first, then config.fig3.beta2 values, all at |α|² = config.fig3.alpha2.
  std::vector<SteadyPoint> points;
};

Fig3Result run_fig3(const RunConfig& config);

/// One pulsed run with n_s signal photons.
struct Fig4Run {
  int n_s{0};
  CascadeFluxes fluxes{};
  /// Probe transmission averaged over the probe window around τ_d.
  double Tb_windowed{0.0};
  /// Largest instantaneous probe transmission within the metric window.
  double Tb_peak{0.0};
  /// Signal reflectance (survival) and transmittance over the metric window.
  std::optional<double> R_a{};
  std::optional<double> T_a{};
  double input_photons{0.0};
  double trace_drift{0.0};
  TruncationReport truncation{};
};

struct Fig4Result {
  /// Probe transmission of the undisturbed system (no signal, steady state).
  double Tb_steady{0.0};
  std::vector<Fig4Run> runs;
  std::vector<std::string> warnings;
};

/// Integrates the cascaded model on [0, t_end] for each photon number.
Fig4Result run_fig4(const RunConfig& config);

/// Single pulsed run; shared by run_fig4 and the truncation ladder.
Fig4Run run_pulse(const RunConfig& config, int n_s, const TruncationLevels& levels);

/// Rates of the ⁸⁷Rb implementation in MHz (each quoted as 2π × value).
struct Rb87Rates {
  double kappa_ex1{480.0};
  double kappa_ex2{6.0};
  double kappa_ex3{243.0};
  double kappa_ex4{243.0};
  double kappa_in{0.5};
  double gamma{3.0};
  double g{52.0};

  /// κ := κ_a = κ_ex,1 + κ_ex,2 + κ_in, the rate unit of the normalized params.
  double kappa_unit() const { return kappa_ex1 + kappa_ex2 + kappa_in; }
  /// Normalized parameters with |β|²/κ = 10⁻² and no signal drive.
  QcnParams to_params() const;
};

QcnParams rb87_params();

struct Rb87Result {
  Rb87Rates rates{};
  Fig4Result fig4{};
  /// R_a of the single-photon run.
  std::optional<double> survival{};
};

Rb87Result preset_rb87(const RunConfig& config);

}  // namespace qcn::experiments
