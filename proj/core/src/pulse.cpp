#include "qcn/pulse.hpp"

#include "qcn/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qcn {

std::string to_string(PulseShape shape) {
  return shape == PulseShape::gaussian ? "gaussian" : "exponential";
}

PulseShape pulse_shape_from_string(const std::string& name) {
  if (name == "gaussian") return PulseShape::gaussian;
  if (name == "exponential") return PulseShape::exponential;
  fail(ErrorCategory::config, "unknown pulse shape '" + name + "'");
}

namespace {

// Upper-tail mass of a unit gaussian beyond z.
double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

PulseSchedule::PulseSchedule(const PulseSpec& pulse, double coupling_max, TimeWindow window)
    : pulse_(pulse), coupling_max_(coupling_max), window_(window) {
  if (!(coupling_max_ > 0.0)) fail(ErrorCategory::domain, "pulse: coupling cap must be positive");
  if (!(window_.t1 > window_.t0)) fail(ErrorCategory::domain, "pulse: empty time window");
  if (pulse_.delay < window_.t0 || pulse_.delay > window_.t1) {
    fail(ErrorCategory::domain, "pulse: delay lies outside the simulation window");
  }

  if (pulse_.shape == PulseShape::gaussian) {
    if (!(pulse_.duration > 0.0)) fail(ErrorCategory::domain, "pulse: duration must be positive");
    sigma_ = pulse_.duration / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double mass = upper_tail((window_.t0 - pulse_.delay) / sigma_) -
                        upper_tail((window_.t1 - pulse_.delay) / sigma_);
    if (!(mass > 1e-6)) fail(ErrorCategory::domain, "pulse: envelope not normalizable in window");
    norm_ = mass;

    // The hazard rate of a gaussian grows monotonically, so the cap engages once
    // and stays on. Bisect for the onset.
    double lo = pulse_.delay;
    double hi = window_.t1;
    if (coupling(hi) < coupling_max_) {
      clip_onset_ = window_.t1;
      clipped_fraction_ = 0.0;
    } else {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double rem = remaining_fraction(mid);
        const double k = rem > 0.0 ? envelope_sq(mid) / rem : coupling_max_;
        (k < coupling_max_ ? lo : hi) = mid;
      }
      clip_onset_ = hi;
      clipped_fraction_ = remaining_fraction(clip_onset_);
    }
  } else {
    norm_ = 1.0 - std::exp(-coupling_max_ * (window_.t1 - pulse_.delay));
    if (!(norm_ > 1e-6)) fail(ErrorCategory::domain, "pulse: envelope not normalizable in window");
    clip_onset_ = window_.t1;
  }
}

double PulseSchedule::envelope_sq(double t) const {
  if (t < window_.t0 || t > window_.t1) return 0.0;
  if (pulse_.shape == PulseShape::gaussian) {
    const double z = (t - pulse_.delay) / sigma_;
    return std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * std::numbers::pi) * norm_);
  }
  if (t < pulse_.delay) return 0.0;
  return coupling_max_ * std::exp(-coupling_max_ * (t - pulse_.delay)) / norm_;
}

double PulseSchedule::remaining_fraction(double t) const {
  if (t <= window_.t0) return 1.0;
  if (t >= window_.t1) return 0.0;
  if (pulse_.shape == PulseShape::gaussian) {
    const double rem = upper_tail((t - pulse_.delay) / sigma_) -
                       upper_tail((window_.t1 - pulse_.delay) / sigma_);
    return std::max(0.0, rem / norm_);
  }
  if (t < pulse_.delay) return 1.0;
  const double c = coupling_max_;
  return (std::exp(-c * (t - pulse_.delay)) - std::exp(-c * (window_.t1 - pulse_.delay))) / norm_;
}

double PulseSchedule::emitted_fraction(double t) const { return 1.0 - remaining_fraction(t); }

double PulseSchedule::coupling(double t) const {
  if (t < window_.t0) return 0.0;
  if (pulse_.shape == PulseShape::exponential) {
    return t < pulse_.delay ? 0.0 : coupling_max_;
  }
  const double rem = remaining_fraction(t);
  const double flux = envelope_sq(t);
  if (rem <= 0.0 || flux >= coupling_max_ * rem) return coupling_max_;
  return flux / rem;
}

std::vector<std::string> PulseSchedule::diagnostics() const {
  std::vector<std::string> out;
  if (clipped_fraction_ > 0.01) {
    std::ostringstream os;
    os << "pulse: coupling cap " << coupling_max_ << " active for " << clipped_fraction_ * 100.0
       << "% of the packet energy";
    out.push_back(os.str());
  }
  return out;
}

PulseSchedule pulse_coupling_schedule(const PulseSpec& pulse, double coupling_max,
                                      TimeWindow window) {
  return PulseSchedule(pulse, coupling_max, window);
}

}  // namespace qcn
