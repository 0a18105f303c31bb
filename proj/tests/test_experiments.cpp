#include "qcn/error.hpp"
#include "qcn/experiments/config.hpp"
#include "qcn/experiments/output.hpp"
#include "qcn/experiments/scenarios.hpp"
#include "qcn/experiments/truncation.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qcn::experiments {
namespace {

namespace fs = std::filesystem;

ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "expected qcn::Error";
  return ErrorCategory::io;
}

std::string csv_text(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

const CsvTable& table(const RunOutputs& o, const std::string& name) {
  for (const auto& t : o.tables)
    if (t.name == name) return t;
  throw std::runtime_error("no table " + name);
}

RunConfig small_fig4() {
  RunConfig c = default_config(Scenario::fig4);
  c.cascade->pulse = {PulseShape::gaussian, 20.0, 6.0};
  c.fig4.t_end = 40.0;
  c.fig4.grid_step = 0.5;
  c.fig4.metric_halfwidth = 3.0;
  c.fig4.photon_numbers = {0, 1};
  c.truncation.automatic = false;
  c.truncation.n_b = 2;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qcn-test-" + name);
  fs::remove_all(p);
  return p;
}

TEST(Config, RoundTrip) {
  for (Scenario s : {Scenario::steady, Scenario::sweep2d, Scenario::fig2, Scenario::fig3, Scenario::fig4,
                     Scenario::preset_rb87}) {
    const RunConfig c = default_config(s);
    std::istringstream in(format_config(c));
    const RunConfig back = parse_config(in);
    EXPECT_EQ(format_config(back), format_config(c)) << to_string(s);
    EXPECT_EQ(back.params.alpha, c.params.alpha);
    EXPECT_EQ(back.params.beta, c.params.beta);
    EXPECT_EQ(back.cascade.has_value(), c.cascade.has_value());
  }
}

TEST(Config, UnknownKeyIsAnError) {
  std::istringstream in("[run]\nscenario = steady\n[params]\ng3 = 0.1\n");
  EXPECT_EQ(category_of([&] { parse_config(in); }), ErrorCategory::config);
  std::istringstream bad("[run]\nscenario = fig9\n");
  EXPECT_EQ(category_of([&] { parse_config(bad); }), ErrorCategory::config);
}

TEST(Config, ValidationRejectsNonsense) {
  RunConfig c = default_config(Scenario::fig2);
  c.jobs = 0;
  EXPECT_EQ(category_of([&] { validate(c); }), ErrorCategory::config);
  c = default_config(Scenario::fig2);
  c.alpha2_axis.min = -1.0;
  EXPECT_EQ(category_of([&] { validate(c); }), ErrorCategory::config);
  c = default_config(Scenario::fig2);
  c.rtol = 0.0;
  EXPECT_EQ(category_of([&] { validate(c); }), ErrorCategory::config);
}

TEST(Config, TruncationParsing) {
  EXPECT_TRUE(parse_truncation("auto").automatic);
  const auto one = parse_truncation("4");
  EXPECT_FALSE(one.automatic);
  EXPECT_EQ(one.n_a, 4);
  EXPECT_EQ(one.n_b, 4);
  const auto four = parse_truncation("3,5,2,6");
  EXPECT_EQ(four.n_a, 3);
  EXPECT_EQ(four.n_b, 5);
  EXPECT_EQ(four.n_d1, 2);
  EXPECT_EQ(four.n_d2, 6);
  EXPECT_THROW(parse_truncation("3,x"), Error);
  EXPECT_THROW(parse_truncation("-1"), Error);
}

TEST(Config, LogAxisHitsDecadesExactly) {
  const auto v = LogAxis{1e-4, 1e-1, 7}.values();
  ASSERT_EQ(v.size(), 7u);
  EXPECT_EQ(v[0], 1e-4);
  EXPECT_EQ(v[2], 1e-3);
  EXPECT_EQ(v[4], 1e-2);
  EXPECT_EQ(v[6], 1e-1);
}

TEST(Ladder, SyntheticSeriesStopsAtTolerance) {
  // e^{-n} - e^{-n-1} first drops below 1e-3 at n = 7.
  TruncationSpec spec;
  auto eval = [](const TruncationLevels& l) { return std::vector<double>{std::exp(-l.n_a), 0.5}; };
  auto dim = [](const TruncationLevels& l) { return static_cast<std::size_t>(3 * (l.n_a + 1)); };
  const auto rep = converge_levels(spec, {}, {Subsystem::cav_a}, {"x", "y"}, eval, dim);
  EXPECT_EQ(rep.levels.n_a, 7);
  EXPECT_LT(rep.max_delta(), 1e-3);
  EXPECT_EQ(rep.deltas[1], 0.0);

  spec.max_dim = 15;
  EXPECT_EQ(category_of([&] { converge_levels(spec, {}, {Subsystem::cav_a}, {"x", "y"}, eval, dim); }),
            ErrorCategory::solver);

  spec.automatic = false;
  spec.max_dim = 1500;
  const auto fixed = converge_levels(spec, {}, {Subsystem::cav_a}, {"x", "y"}, eval, dim);
  EXPECT_EQ(fixed.evaluations, 1);
  EXPECT_TRUE(std::isnan(fixed.deltas[0]));
}

TEST(Ladder, WeakDriveNeedsMinimumLevel) {
  const auto rep = converge_truncation(default_config(Scenario::steady));
  EXPECT_EQ(rep.levels.n_a, 2);
  EXPECT_EQ(rep.levels.n_b, 2);
  EXPECT_LT(rep.max_delta(), 1e-3);
}

TEST(Ladder, StrongLabFrameDriveGrows) {
  RunConfig c = default_config(Scenario::steady);
  c.frame = FrameMode::lab;
  c.params = QcnParams::fig2(0.3, 0.0);
  c.params.g1 = c.params.g2 = 0.0;
  const auto rep = converge_truncation(c);
  EXPECT_GT(rep.levels.n_a, 2);
  EXPECT_EQ(rep.levels.n_b, 2);
  EXPECT_LT(rep.max_delta(), 1e-3);
}

TEST(Rb87, NormalizedRates) {
  const QcnParams p = rb87_params();
  EXPECT_NEAR(p.kappa_a(), 1.0, 1e-12);
  EXPECT_NEAR(p.g1, 52.0 / 486.5, 1e-12);
  EXPECT_NEAR(p.g1, 0.107, 1e-3);
  EXPECT_NEAR(std::norm(p.beta), 1e-2, 1e-15);
  EXPECT_EQ(p.alpha, cplx(0.0, 0.0));
}

TEST(Outputs, Fig2ColumnContract) {
  RunConfig c = default_config(Scenario::fig2);
  c.alpha2_axis = {1e-3, 1e-2, 2};
  c.beta2_axis = {1e-3, 1e-2, 2};
  c.cut_beta2 = {0.0};
  const RunOutputs o = run_scenario(c);
  const std::vector<std::string> cols{"alpha2_over_kappa", "beta2_over_kappa", "Ta_numeric",
                                      "Ta_analytic",       "Tb_numeric",       "Tb_analytic"};
  EXPECT_EQ(table(o, "fig2").columns, cols);
  EXPECT_EQ(table(o, "fig2").rows.size(), 4u);
  EXPECT_EQ(table(o, "fig2_cuts").rows.size(), 2u);
}

TEST(Outputs, ParallelSweepKeepsOrder) {
  RunConfig c = default_config(Scenario::sweep2d);
  c.alpha2_axis = {1e-3, 1e-1, 3};
  c.beta2_axis = {1e-3, 1e-1, 3};
  const std::string serial = csv_text(table(run_scenario(c), "sweep2d"));
  c.jobs = 2;
  EXPECT_EQ(csv_text(table(run_scenario(c), "sweep2d")), serial);
}

TEST(Outputs, Fig4TracesAndManifestRerun) {
  const RunConfig c = small_fig4();
  const RunOutputs o = run_scenario(c);
  const std::vector<std::string> cols{"t_over_kappa_inv", "probe_in_flux",   "probe_out_flux",
                                      "signal_in_flux",   "signal_out_flux", "n_s"};
  EXPECT_EQ(table(o, "fig4").columns, cols);
  EXPECT_EQ(table(o, "fig4").rows.size(), 2u * 81u);

  const fs::path dir = scratch_dir("manifest");
  emit_outputs(o, dir.string());
  ASSERT_TRUE(fs::exists(dir / "manifest.ini"));
  ASSERT_TRUE(fs::exists(dir / "plot.py"));
  const RunConfig again = load_config((dir / "manifest.ini").string());
  const RunOutputs o2 = run_scenario(again);
  for (std::size_t i = 0; i < o.tables.size(); ++i) {
    EXPECT_EQ(csv_text(o2.tables[i]), csv_text(o.tables[i])) << o.tables[i].name;
  }
  fs::remove_all(dir);
}

TEST(Outputs, CsvWritesNanAsEmpty) {
  CsvTable t{"t", {"x", "y"}, {{1.5, std::nan("")}}};
  EXPECT_EQ(csv_text(t), "x,y\n1.5,\n");
  t.rows.push_back({1.0});
  EXPECT_THROW(csv_text(t), Error);
}

#ifdef QCN_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(QCN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("steady --alpha2 1e-3 --beta2 0 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "steady.csv"));
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("steady --rtol abc"), 2);
  EXPECT_EQ(run_cli("steady --config " + (dir / "missing.ini").string()), 8);

  std::ofstream(dir / "bad.ini") << "[run]\nscenario = steady\n[params]\nnope = 1\n";
  EXPECT_EQ(run_cli("steady --config " + (dir / "bad.ini").string()), 7);
  std::ofstream(dir / "neg.ini") << "[run]\nscenario = steady\n[params]\ngamma21 = -1\n";
  EXPECT_EQ(run_cli("steady --config " + (dir / "neg.ini").string()), 5);
  EXPECT_EQ(run_cli("steady --truncation 40 --out " + dir.string()), 6);
  fs::remove_all(dir);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = scratch_dir("env");
  const std::string cmd = "QCN_OUTPUT_DIR=" + dir.string() + " " + QCN_CLI_PATH +
                          " steady --alpha2 1e-3 >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_TRUE(fs::exists(dir / "steady.csv"));
  EXPECT_TRUE(fs::exists(dir / "manifest.ini"));
  fs::remove_all(dir);
}
#endif

}  // namespace
}  // namespace qcn::experiments
