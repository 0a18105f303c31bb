// output.hpp: CSV tables, run manifest and plot script of a scenario run.
//
// CSVs are UTF-8 with one header row. Numbers use the shortest round-trip
// form; an empty field marks an undefined value (for example the analytic
// column off resonance).

#pragma once

#include "qcn/experiments/config.hpp"
#include "qcn/experiments/scenarios.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qcn::experiments {

struct CsvTable {
  /// File stem; written as <name>.csv.
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table);

/// Everything a run writes, assembled before touching the file system.
struct RunOutputs {
  RunConfig config;
  std::vector<CsvTable> tables;
  /// One line per solve, in grid order.
  std::vector<std::string> truncation;
  std::vector<std::string> warnings;
  /// One-line human summary per headline quantity.
  std::vector<std::string> summary;
};

RunOutputs tabulate(const RunConfig& config, const SteadyPoint& point);
RunOutputs tabulate(const RunConfig& config, const SweepTable& table);
RunOutputs tabulate(const RunConfig& config, const Fig2Result& result);
RunOutputs tabulate(const RunConfig& config, const Fig3Result& result);
RunOutputs tabulate(const RunConfig& config, const Fig4Result& result);
RunOutputs tabulate(const RunConfig& config, const Rb87Result& result);

/// Runs config.scenario and tabulates it.
RunOutputs run_scenario(const RunConfig& config);

/// Manifest text: the full config followed by a [manifest] section with the
/// tool version, truncation report and warnings. Parses back as a config.
std::string manifest_text(const RunOutputs& outputs);

/// matplotlib script that reads the CSVs from its own directory.
std::string plot_script(const RunOutputs& outputs);

/// Writes the tables, manifest.ini and plot.py into `dir` (created if needed).
/// Returns the written paths. Throws ErrorCategory::io when `dir` is unwritable.
std::vector<std::string> emit_outputs(const RunOutputs& outputs, const std::string& dir);

/// Library version string.
std::string version();

}  // namespace qcn::experiments
