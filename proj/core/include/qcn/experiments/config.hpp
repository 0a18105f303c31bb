// config.hpp: run configuration and its key=value text form.
//
// The text form is INI-like: [section] headers followed by key = value lines.
// Doubles are written in shortest round-trip form, so a written config parses
// back to identical values.

#pragma once

#include "qcn/model.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qcn::experiments {

enum class Scenario { steady, sweep2d, fig2, fig3, fig4, preset_rb87 };

std::string to_string(Scenario s);
/// Accepts both "preset_rb87" and the CLI spelling "preset-rb87".
Scenario scenario_from_string(const std::string& name);

enum class FrameMode { lab, displaced };

std::string to_string(FrameMode mode);
FrameMode frame_mode_from_string(const std::string& name);

/// Fock truncations are highest photon numbers (a mode with n keeps n + 1 levels).
struct TruncationSpec {
  bool automatic{true};
  int n_a{2};
  int n_b{2};
  int n_d1{1};
  int n_d2{2};
  /// Largest change of any reported observable between consecutive levels.
  double tolerance{1e-3};
  std::size_t max_dim{1500};
  int min_level{2};
};

/// Log-spaced axis: `points` values from `min` to `max` inclusive.
struct LogAxis {
  double min{1e-4};
  double max{1e-1};
  int points{9};

  std::vector<double> values() const;
};

struct Fig3Settings {
  double alpha2{1e-2};
  /// Swept |β|²/κ; a β = 0 row is always prepended.
  LogAxis beta2{1e-4, 1.0, 17};
};

struct Fig4Settings {
  std::vector<int> photon_numbers{0, 1, 2, 3};
  double t_end{2.0 * 3.14159265358979323846 * 250.0};
  double grid_step{2.0 * 3.14159265358979323846 * 0.25};
  /// Half-width of the signal metric window, in units of τ_s.
  double metric_halfwidth{5.0};
  /// Half-width of the probe averaging window, in units of τ_s.
  double probe_halfwidth{0.5};
};

struct RunConfig {
  Scenario scenario{Scenario::steady};
  QcnParams params{};
  std::optional<CascadeSpec> cascade{};
  TruncationSpec truncation{};
  std::string output_dir{"qcn-out"};
  double rtol{1e-8};
  int jobs{1};
  FrameMode frame{FrameMode::displaced};
  /// sweep2d / fig2 grid axes (|α|²/κ, |β|²/κ).
  LogAxis alpha2_axis{};
  LogAxis beta2_axis{};
  /// fig2 line cuts: T_a along the α axis at each of these |β|²/κ.
  std::vector<double> cut_beta2{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  Fig3Settings fig3{};
  Fig4Settings fig4{};
};

/// Default configuration of a scenario (figure parameters already applied).
RunConfig default_config(Scenario scenario);

/// Throws ErrorCategory::config on out-of-range settings.
void validate(const RunConfig& config);

/// Parses the text form on top of default_config(scenario read from [run]).
/// Unknown sections or keys are rejected, except [manifest] which is ignored.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

void write_config(std::ostream& out, const RunConfig& config);
std::string format_config(const RunConfig& config);

/// "3,3" / "3,3,2,1" / "auto" (the form accepted by --truncation).
TruncationSpec parse_truncation(const std::string& text, TruncationSpec base = {});

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

}  // namespace qcn::experiments
