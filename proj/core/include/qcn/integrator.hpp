// integrator.hpp: embedded Dormand–Prince 5(4) for matrix-valued ODEs with
// the fourth-order continuous extension used to sample a fixed output grid.

#pragma once

#include "qcn/hilbert.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace qcn {

struct OdeOptions {
  double rtol{1e-8};
  double atol{1e-10};
  double max_step{std::numeric_limits<double>::infinity()};
  /// 0 selects an initial step automatically.
  double initial_step{0.0};
  /// Relative to the current time scale; below this the run aborts.
  double min_step{1e-12};
  std::size_t max_steps{5'000'000};
};

struct OdeStats {
  std::size_t accepted{0};
  std::size_t rejected{0};
  std::size_t rhs_calls{0};
};

class Dopri5 {
 public:
  using Rhs = std::function<void(double t, const DenseMat& y, DenseMat& dydt)>;
  /// Called with every grid time and the interpolated state.
  using Sampler = std::function<void(double t, const DenseMat& y)>;
  /// Called after each accepted step with the state and its derivative (the
  /// first stage of the next step). A projection applied to y must be applied
  /// to dydt as well, and must commute with the right-hand side.
  using StepHook = std::function<void(double t, DenseMat& y, DenseMat& dydt)>;

  Dopri5(Rhs rhs, OdeOptions options);

  /// Integrates from grid.front() to grid.back(). The first sample is y0 itself.
  /// Throws ErrorCategory::solver on step-size underflow.
  DenseMat integrate(DenseMat y0, const std::vector<double>& grid, const Sampler& sample,
                     const StepHook& on_step = {});

  const OdeStats& stats() const noexcept { return stats_; }

 private:
  double error_norm(const DenseMat& err, const DenseMat& y0, const DenseMat& y1) const;
  double initial_step(double t0, const DenseMat& y0, const DenseMat& f0, double span);

  Rhs rhs_;
  OdeOptions opt_;
  OdeStats stats_;
};

}  // namespace qcn
