// pulse.hpp: time-dependent output coupling of the signal source cavity.
//
// A cavity loaded with n photons and an output rate κ(t) emits the flux
// n κ(t) exp(-∫κ). Choosing κ(t) = |ξ(t)|² / (1 - ∫_{t0}^{t} |ξ|²) makes that
// flux n |ξ(t)|² for any normalized target envelope ξ.

#pragma once

#include <string>
#include <vector>

namespace qcn {

enum class PulseShape { gaussian, exponential };

std::string to_string(PulseShape shape);
PulseShape pulse_shape_from_string(const std::string& name);

struct PulseSpec {
  PulseShape shape{PulseShape::gaussian};
  /// Center of the gaussian packet / switch-on time of the exponential one, in 1/κ.
  double delay{0.0};
  /// Gaussian: intensity FWHM. Exponential: unused (the rate is the coupling cap).
  double duration{1.0};
};

struct TimeWindow {
  double t0{0.0};
  double t1{1.0};
};

class PulseSchedule {
 public:
  PulseSchedule(const PulseSpec& pulse, double coupling_max, TimeWindow window);

  /// Output coupling κ_d1,ex2(t), in [0, coupling_max].
  double coupling(double t) const;
  /// Target emitted intensity |ξ(t)|², normalized to one over the window.
  double envelope_sq(double t) const;
  /// ∫_{t0}^{t} |ξ|²
  double emitted_fraction(double t) const;
  /// Energy fraction of the envelope emitted while the coupling cap is active.
  double clipped_fraction() const noexcept { return clipped_fraction_; }

  const PulseSpec& pulse() const noexcept { return pulse_; }
  double coupling_max() const noexcept { return coupling_max_; }
  const TimeWindow& window() const noexcept { return window_; }

  /// Intensity standard deviation of the gaussian envelope.
  double sigma() const noexcept { return sigma_; }

  /// Human-readable warnings (clipping above 1% of the packet energy).
  std::vector<std::string> diagnostics() const;

 private:
  /// 1 - emitted_fraction(t), evaluated without cancellation.
  double remaining_fraction(double t) const;

  PulseSpec pulse_;
  double coupling_max_;
  TimeWindow window_;
  double sigma_{0.0};
  double norm_{1.0};
  double clip_onset_{0.0};
  double clipped_fraction_{0.0};
};

/// Builds the coupling schedule for a packet emitted inside `window`.
/// Throws ErrorCategory::domain when the envelope cannot be normalized there.
PulseSchedule pulse_coupling_schedule(const PulseSpec& pulse, double coupling_max, TimeWindow window);

}  // namespace qcn
