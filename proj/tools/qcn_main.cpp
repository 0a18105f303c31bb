// qcn: command-line front end for the steady-state sweeps and pulsed
// detection runs.
//
// Exit codes: 0 success, 2 usage, then one code per error category
// (3 invalid_argument, 4 layout_mismatch, 5 domain, 6 solver, 7 config, 8 io)
// and 9 for anything unclassified. Failures print "error[<category>]: ..." on
// stderr.

#include "qcn/error.hpp"
#include "qcn/experiments/config.hpp"
#include "qcn/experiments/output.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace qcn;
using namespace qcn::experiments;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument: return 3;
    case ErrorCategory::layout_mismatch: return 4;
    case ErrorCategory::domain: return 5;
    case ErrorCategory::solver: return 6;
    case ErrorCategory::config: return 7;
    case ErrorCategory::io: return 8;
  }
  return 9;
}

struct Globals {
  std::string config_path;
  std::string out;
  std::optional<double> rtol;
  std::string truncation;
  std::optional<int> jobs;
};

struct Extras {
  std::optional<double> alpha2;
  std::optional<double> beta2;
  std::string photons;
  std::string probe_mode;
};

RunConfig assemble(Scenario scenario, const Globals& g, const Extras& x) {
  RunConfig c = default_config(scenario);
  if (!g.config_path.empty()) {
    c = load_config(g.config_path);
    if (c.scenario != scenario) {
      fail(ErrorCategory::config, "config '" + g.config_path + "' is for scenario " +
                                      to_string(c.scenario) + ", not " + to_string(scenario));
    }
  }
  if (!g.out.empty()) c.output_dir = g.out;
  if (g.rtol) c.rtol = *g.rtol;
  if (!g.truncation.empty()) c.truncation = parse_truncation(g.truncation, c.truncation);
  if (g.jobs) c.jobs = *g.jobs;
  if (x.alpha2) c.params.alpha = std::sqrt(*x.alpha2);
  if (x.beta2) c.params.beta = std::sqrt(*x.beta2);
  if (!x.photons.empty() || !x.probe_mode.empty()) {
    RunConfig patched = c;
    if (!x.photons.empty()) {
      patched.fig4.photon_numbers.clear();
      std::size_t pos = 0;
      while (pos <= x.photons.size()) {
        const auto next = x.photons.find(',', pos);
        const std::string item = x.photons.substr(pos, next - pos);
        try {
          patched.fig4.photon_numbers.push_back(std::stoi(item));
        } catch (const std::exception&) {
          fail(ErrorCategory::config, "--photons: '" + item + "' is not an integer");
        }
        if (next == std::string::npos) break;
        pos = next + 1;
      }
    }
    if (!x.probe_mode.empty()) {
      if (!patched.cascade) patched.cascade = CascadeSpec{};
      try {
        patched.cascade->probe_mode = probe_mode_from_string(x.probe_mode);
      } catch (const Error& e) {
        fail(ErrorCategory::config, e.what());
      }
    }
    c = patched;
  }
  validate(c);
  return c;
}

int run(Scenario scenario, const Globals& g, const Extras& x) {
  const RunConfig config = assemble(scenario, g, x);
  const RunOutputs out = run_scenario(config);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& line : out.summary) std::cout << line << '\n';
  for (const auto& path : emit_outputs(out, config.output_dir)) std::cout << "wrote " << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state and pulsed simulations of a V-type emitter coupled to two cavities"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  Extras x;
  app.add_option("--config", g.config_path, "Run configuration (key = value sections)");
  app.add_option("--out", g.out, "Output directory")->envname("QCN_OUTPUT_DIR");
  app.add_option("--rtol", g.rtol, "Relative tolerance of the time integrator");
  app.add_option("--truncation", g.truncation, "'auto' or n_a,n_b[,n_d1[,n_d2]]");
  app.add_option("--jobs", g.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  auto* steady = app.add_subcommand("steady", "Steady state at one drive point");
  steady->add_option("--alpha2", x.alpha2, "|alpha|^2 / kappa")->check(CLI::NonNegativeNumber);
  steady->add_option("--beta2", x.beta2, "|beta|^2 / kappa")->check(CLI::NonNegativeNumber);
  auto* sweep = app.add_subcommand("sweep2d", "Log grid over both drive powers");
  auto* fig2 = app.add_subcommand("fig2", "Transmission map and line cuts");
  auto* fig3 = app.add_subcommand("fig3", "Excited-state populations versus |beta|^2");
  auto* fig4 = app.add_subcommand("fig4", "Pulsed photon-number detection");
  auto* rb87 = app.add_subcommand("preset-rb87", "Pulsed detection with the Rb-87 rates");
  for (auto* sub : {fig4, rb87}) {
    sub->add_option("--photons", x.photons, "Comma-separated signal photon numbers (0..3)");
    sub->add_option("--probe-mode", x.probe_mode, "classical_drive or cascaded_source");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<Scenario> scenario;
  if (*steady) scenario = Scenario::steady;
  if (*sweep) scenario = Scenario::sweep2d;
  if (*fig2) scenario = Scenario::fig2;
  if (*fig3) scenario = Scenario::fig3;
  if (*fig4) scenario = Scenario::fig4;
  if (*rb87) scenario = Scenario::preset_rb87;

  try {
    return run(*scenario, g, x);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 9;
  }
}
