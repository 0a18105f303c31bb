// truncation.hpp: Fock-truncation convergence ladder.

#pragma once

#include "qcn/experiments/config.hpp"
#include "qcn/hilbert.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace qcn::experiments {

/// Highest photon number kept per bosonic mode.
struct TruncationLevels {
  int n_a{2};
  int n_b{2};
  int n_d1{1};
  int n_d2{2};

  int& operator[](Subsystem s);
  int operator[](Subsystem s) const;
  bool operator==(const TruncationLevels&) const = default;
  auto operator<=>(const TruncationLevels&) const = default;
};

struct TruncationReport {
  bool automatic{false};
  TruncationLevels levels{};
  std::vector<Subsystem> varied;
  std::vector<std::string> observables;
  /// Observable values at the final levels.
  std::vector<double> values;
  /// Largest change of each observable against one level up in any varied mode
  /// (NaN in fixed mode, where no comparison is made).
  std::vector<double> deltas;
  std::size_t dimension{0};
  int evaluations{0};

  double max_delta() const;
  std::string describe() const;
};

/// Observable values at the given levels; NaN marks an observable that is
/// undefined for this run (for example T_a without a drive).
using LevelEvaluator = std::function<std::vector<double>(const TruncationLevels&)>;
using DimensionOf = std::function<std::size_t(const TruncationLevels&)>;

/// Raises each mode in `varied` (starting from `start`) until no observable
/// changes by tolerance or more when that mode gains one level. Throws
/// ErrorCategory::solver if the dimension cap is reached first. In fixed mode
/// evaluates `start` once.
TruncationReport converge_levels(const TruncationSpec& spec, TruncationLevels start,
                                 const std::vector<Subsystem>& varied,
                                 const std::vector<std::string>& observables,
                                 const LevelEvaluator& evaluate, const DimensionOf& dimension);

/// Layout of the driven system (emitter, a, b) at the given levels.
LayoutPtr steady_layout(const TruncationLevels& levels);

/// Ladder for the steady scenario at config.params, on T_a, T_b, ⟨σ₂₂⟩, ⟨σ₃₃⟩.
TruncationReport converge_truncation(const RunConfig& config);

/// Levels requested by a fixed-mode spec.
TruncationLevels fixed_levels(const TruncationSpec& spec);

}  // namespace qcn::experiments
