#include "qcn/experiments/output.hpp"

#include "qcn/error.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace qcn::experiments {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double opt(const std::optional<double>& x) { return x ? *x : kNaN; }

std::string percent(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << 100.0 * x << "%";
  return os.str();
}

void add_truncation(RunOutputs& out, const std::string& label, const TruncationReport& rep) {
  out.truncation.push_back(label + " " + rep.describe());
}

std::string point_label(const SteadyPoint& p) {
  return "alpha2=" + format_double(p.alpha2) + " beta2=" + format_double(p.beta2);
}

const std::vector<std::string> kSteadyColumns{
    "alpha2_over_kappa", "beta2_over_kappa",  "Ta_numeric",      "Ta_analytic",
    "Tb_numeric",        "Tb_analytic",       "sigma22_numeric", "sigma22_analytic",
    "sigma33_numeric",   "sigma33_analytic",  "na_numeric",      "nb_numeric",
    "n_a_trunc",         "n_b_trunc"};

std::vector<double> steady_row(const SteadyPoint& p) {
  const auto& n = p.numeric;
  const auto& ta = p.T_analytic;
  const auto& pa = p.populations_analytic;
  return {p.alpha2,
          p.beta2,
          opt(n.T_a),
          ta && p.alpha2 > 0.0 ? ta->a : kNaN,
          opt(n.T_b),
          ta && p.beta2 > 0.0 ? ta->b : kNaN,
          n.sigma22,
          pa ? pa->a : kNaN,
          n.sigma33,
          pa ? pa->b : kNaN,
          n.n_a,
          n.n_b,
          static_cast<double>(p.truncation.levels.n_a),
          static_cast<double>(p.truncation.levels.n_b)};
}

const std::vector<std::string> kTraceColumns{"t_over_kappa_inv", "probe_in_flux", "probe_out_flux",
                                             "signal_in_flux",   "signal_out_flux", "n_s"};
const std::vector<std::string> kMetricColumns{
    "n_s", "Tb_windowed", "Tb_peak", "Tb_steady", "R_a", "T_a", "input_photons", "trace_drift",
    "n_d1_trunc", "n_a_trunc", "n_b_trunc", "n_d2_trunc"};

void add_fig4_tables(RunOutputs& out, const Fig4Result& r, const std::string& stem) {
  CsvTable traces{stem, kTraceColumns, {}};
  CsvTable metrics{stem + "_metrics", kMetricColumns, {}};
  for (const auto& run : r.runs) {
    const auto& f = run.fluxes;
    for (std::size_t i = 0; i < f.times.size(); ++i) {
      traces.rows.push_back({f.times[i], f.probe_in[i], f.probe_out[i], f.signal_in[i],
                             f.signal_out[i], static_cast<double>(run.n_s)});
    }
    const auto& lv = run.truncation.levels;
    metrics.rows.push_back({static_cast<double>(run.n_s), run.Tb_windowed, run.Tb_peak,
                            r.Tb_steady, opt(run.R_a), opt(run.T_a), run.input_photons,
                            run.trace_drift, static_cast<double>(lv.n_d1),
                            static_cast<double>(lv.n_a), static_cast<double>(lv.n_b),
                            static_cast<double>(lv.n_d2)});
    add_truncation(out, "n_s=" + std::to_string(run.n_s), run.truncation);
    std::string line = "n_s=" + std::to_string(run.n_s) +
                       ": probe transmission windowed " + percent(run.Tb_windowed) + ", peak " +
                       percent(run.Tb_peak);
    if (run.R_a) line += ", signal survival R_a " + percent(*run.R_a);
    out.summary.push_back(line);
  }
  out.summary.push_back("steady probe transmission without signal " + percent(r.Tb_steady));
  out.tables.push_back(std::move(traces));
  out.tables.push_back(std::move(metrics));
  out.warnings = r.warnings;
}

std::string py_list(const std::vector<std::string>& names) {
  std::string s = "[";
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? ", '" : "'") + names[i] + "'";
  return s + "]";
}

}  // namespace

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      fail(ErrorCategory::invalid_argument, "csv: row width differs from header in " + table.name);
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (!std::isnan(row[i])) out << format_double(row[i]);
    }
    out << '\n';
  }
}

RunOutputs tabulate(const RunConfig& config, const SteadyPoint& point) {
  RunOutputs out{config, {}, {}, {}, {}};
  out.tables.push_back({"steady", kSteadyColumns, {steady_row(point)}});
  add_truncation(out, point_label(point), point.truncation);
  if (point.numeric.T_a) out.summary.push_back("T_a = " + format_double(*point.numeric.T_a));
  if (point.numeric.T_b) out.summary.push_back("T_b = " + format_double(*point.numeric.T_b));
  out.summary.push_back("sigma22 = " + format_double(point.numeric.sigma22) +
                        ", sigma33 = " + format_double(point.numeric.sigma33));
  for (const auto& w : validate(config.params).warnings) out.warnings.push_back(w);
  return out;
}

RunOutputs tabulate(const RunConfig& config, const SweepTable& table) {
  RunOutputs out{config, {}, {}, {}, {}};
  CsvTable t{"sweep2d", kSteadyColumns, {}};
  double worst = 0.0;
  for (const auto& cell : table.cells) {
    t.rows.push_back(steady_row(cell));
    add_truncation(out, point_label(cell), cell.truncation);
    if (cell.numeric.T_a && cell.T_analytic) {
      worst = std::max(worst, std::abs(*cell.numeric.T_a - cell.T_analytic->a));
    }
  }
  out.tables.push_back(std::move(t));
  out.summary.push_back(std::to_string(table.cells.size()) + " cells, max |T_a numeric - analytic| = " +
                        format_double(worst));
  return out;
}

RunOutputs tabulate(const RunConfig& config, const Fig2Result& r) {
  RunOutputs out{config, {}, {}, {}, {}};
  CsvTable grid{"fig2",
                {"alpha2_over_kappa", "beta2_over_kappa", "Ta_numeric", "Ta_analytic", "Tb_numeric",
                 "Tb_analytic"},
                {}};
  CsvTable pops{"fig2_populations",
                {"alpha2_over_kappa", "beta2_over_kappa", "sigma22_numeric", "sigma22_analytic",
                 "sigma33_numeric", "sigma33_analytic"},
                {}};
  double dt = 0.0, dp = 0.0;
  for (const auto& c : r.grid.cells) {
    const auto row = steady_row(c);
    grid.rows.push_back({row[0], row[1], row[2], row[3], row[4], row[5]});
    pops.rows.push_back({row[0], row[1], row[6], row[7], row[8], row[9]});
    dt = std::max({dt, std::abs(row[2] - row[3]), std::abs(row[4] - row[5])});
    dp = std::max({dp, std::abs(row[6] - row[7]), std::abs(row[8] - row[9])});
    add_truncation(out, point_label(c), c.truncation);
  }
  CsvTable cuts{"fig2_cuts", {"beta2_over_kappa", "alpha2_over_kappa", "Ta_numeric", "Ta_analytic"}, {}};
  for (const auto& c : r.cuts) {
    const auto row = steady_row(c);
    cuts.rows.push_back({row[1], row[0], row[2], row[3]});
    add_truncation(out, "cut " + point_label(c), c.truncation);
  }
  out.tables.push_back(std::move(grid));
  out.tables.push_back(std::move(pops));
  out.tables.push_back(std::move(cuts));
  out.summary.push_back("grid max |T numeric - analytic| = " + format_double(dt));
  out.summary.push_back("grid max |population numeric - analytic| = " + format_double(dp));
  return out;
}

RunOutputs tabulate(const RunConfig& config, const Fig3Result& r) {
  RunOutputs out{config, {}, {}, {}, {}};
  CsvTable t{"fig3",
             {"beta2_over_kappa", "sigma22_numeric", "sigma22_analytic", "sigma33_numeric",
              "sigma33_analytic", "Ta_numeric", "Ta_analytic"},
             {}};
  for (const auto& p : r.points) {
    const auto row = steady_row(p);
    t.rows.push_back({row[1], row[6], row[7], row[8], row[9], row[2], row[3]});
    add_truncation(out, point_label(p), p.truncation);
  }
  out.tables.push_back(std::move(t));
  return out;
}

RunOutputs tabulate(const RunConfig& config, const Fig4Result& r) {
  RunOutputs out{config, {}, {}, {}, {}};
  add_fig4_tables(out, r, "fig4");
  return out;
}

RunOutputs tabulate(const RunConfig& config, const Rb87Result& r) {
  RunOutputs out{config, {}, {}, {}, {}};
  add_fig4_tables(out, r.fig4, "rb87");
  const Rb87Rates& k = r.rates;
  const double unit = k.kappa_unit();
  CsvTable params{"rb87_params", {"kappa_ex1", "kappa_ex2", "kappa_ex3", "kappa_ex4", "kappa_in",
                                  "gamma", "g", "kappa_unit"}, {}};
  params.rows.push_back({k.kappa_ex1, k.kappa_ex2, k.kappa_ex3, k.kappa_ex4, k.kappa_in, k.gamma,
                         k.g, unit});
  params.rows.push_back({k.kappa_ex1 / unit, k.kappa_ex2 / unit, k.kappa_ex3 / unit,
                         k.kappa_ex4 / unit, k.kappa_in / unit, k.gamma / unit, k.g / unit, 1.0});
  out.tables.push_back(std::move(params));
  if (r.survival) out.summary.push_back("single-photon survival " + percent(*r.survival));
  return out;
}

RunOutputs run_scenario(const RunConfig& config) {
  switch (config.scenario) {
    case Scenario::steady: return tabulate(config, run_steady(config));
    case Scenario::sweep2d: return tabulate(config, run_sweep2d(config));
    case Scenario::fig2: return tabulate(config, run_fig2(config));
    case Scenario::fig3: return tabulate(config, run_fig3(config));
    case Scenario::fig4: return tabulate(config, run_fig4(config));
    case Scenario::preset_rb87: return tabulate(config, preset_rb87(config));
  }
  fail(ErrorCategory::invalid_argument, "unknown scenario");
}

std::string version() {
#ifdef QCN_VERSION
  return QCN_VERSION;
#else
  return "unknown";
#endif
}

std::string manifest_text(const RunOutputs& o) {
  std::ostringstream os;
  write_config(os, o.config);
  os << "\n[manifest]\n";
  os << "version = " << version() << '\n';
  for (std::size_t i = 0; i < o.tables.size(); ++i) {
    os << "table_" << i << " = " << o.tables[i].name << ".csv\n";
  }
  for (std::size_t i = 0; i < o.truncation.size(); ++i) {
    os << "truncation_" << i << " = " << o.truncation[i] << '\n';
  }
  for (std::size_t i = 0; i < o.warnings.size(); ++i) {
    os << "warning_" << i << " = " << o.warnings[i] << '\n';
  }
  return os.str();
}

std::string plot_script(const RunOutputs& o) {
  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
        "# Plots the CSV tables written next to this script.\n"
        "import csv\n"
        "import os\n"
        "\n"
        "import matplotlib\n"
        "matplotlib.use('Agg')\n"
        "import matplotlib.pyplot as plt\n"
        "\n"
        "HERE = os.path.dirname(os.path.abspath(__file__))\n"
        "\n"
        "\n"
        "def load(name):\n"
        "    with open(os.path.join(HERE, name + '.csv'), newline='', encoding='utf-8') as f:\n"
        "        rows = list(csv.DictReader(f))\n"
        "    return {k: [float(r[k]) if r[k] else float('nan') for r in rows] for k in rows[0]}\n"
        "\n"
        "\n";
  switch (o.config.scenario) {
    case Scenario::steady:
      py << "d = load('steady')\n"
            "fig, ax = plt.subplots()\n"
            "names = ['Ta_numeric', 'Tb_numeric', 'sigma22_numeric', 'sigma33_numeric']\n"
            "ax.bar(names, [d[n][0] for n in names])\n"
            "fig.savefig(os.path.join(HERE, 'steady.png'), dpi=150)\n";
      break;
    case Scenario::sweep2d:
    case Scenario::fig2: {
      const std::string stem = o.config.scenario == Scenario::fig2 ? "fig2" : "sweep2d";
      py << "import numpy as np\n"
            "d = load('" << stem << "')\n"
            "a = sorted(set(d['alpha2_over_kappa']))\n"
            "b = sorted(set(d['beta2_over_kappa']))\n"
            "ta = np.array(d['Ta_numeric']).reshape(len(a), len(b))\n"
            "fig, ax = plt.subplots()\n"
            "m = ax.pcolormesh(b, a, ta, shading='nearest')\n"
            "ax.set_xscale('log')\n"
            "ax.set_yscale('log')\n"
            "ax.set_xlabel('|beta|^2 / kappa')\n"
            "ax.set_ylabel('|alpha|^2 / kappa')\n"
            "fig.colorbar(m, label='T_a')\n"
            "fig.savefig(os.path.join(HERE, '" << stem << "_map.png'), dpi=150)\n";
      if (o.config.scenario == Scenario::fig2) {
        py << "\n"
              "c = load('fig2_cuts')\n"
              "fig, ax = plt.subplots()\n"
              "for beta in sorted(set(c['beta2_over_kappa'])):\n"
              "    idx = [i for i, v in enumerate(c['beta2_over_kappa']) if v == beta]\n"
              "    x = [c['alpha2_over_kappa'][i] for i in idx]\n"
              "    ax.plot(x, [c['Ta_analytic'][i] for i in idx], '-')\n"
              "    ax.plot(x, [c['Ta_numeric'][i] for i in idx], 'o', label=f'|beta|^2={beta:g}')\n"
              "ax.set_xscale('log')\n"
              "ax.set_xlabel('|alpha|^2 / kappa')\n"
              "ax.set_ylabel('T_a')\n"
              "ax.legend(fontsize='small')\n"
              "fig.savefig(os.path.join(HERE, 'fig2_cuts.png'), dpi=150)\n";
      }
      break;
    }
    case Scenario::fig3:
      py << "d = load('fig3')\n"
            "b = d['beta2_over_kappa'][1:]\n"
            "fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))\n"
            "for k, style in (('sigma22', 'C0'), ('sigma33', 'C1')):\n"
            "    ax1.plot(b, d[k + '_analytic'][1:], '-', color=style)\n"
            "    ax1.plot(b, d[k + '_numeric'][1:], 'o', color=style, label=k)\n"
            "ax2.plot(b, d['Ta_analytic'][1:], '-')\n"
            "ax2.plot(b, d['Ta_numeric'][1:], 'o')\n"
            "for ax in (ax1, ax2):\n"
            "    ax.set_xscale('log')\n"
            "    ax.set_xlabel('|beta|^2 / kappa')\n"
            "ax1.legend()\n"
            "ax2.set_ylabel('T_a')\n"
            "fig.tight_layout()\n"
            "fig.savefig(os.path.join(HERE, 'fig3.png'), dpi=150)\n";
      break;
    case Scenario::fig4:
    case Scenario::preset_rb87: {
      const std::string stem = o.config.scenario == Scenario::fig4 ? "fig4" : "rb87";
      py << "import math\n"
            "d = load('" << stem << "')\n"
            "fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))\n"
            "for n in sorted(set(d['n_s'])):\n"
            "    idx = [i for i, v in enumerate(d['n_s']) if v == n]\n"
            "    t = [d['t_over_kappa_inv'][i] / (2 * math.pi) for i in idx]\n"
            "    ax1.plot(t, [d['probe_out_flux'][i] for i in idx], label=f'n_s={n:g}')\n"
            "    ax2.plot(t, [d['signal_in_flux'][i] for i in idx], '--', color=f'C{int(n)}')\n"
            "    ax2.plot(t, [d['signal_out_flux'][i] for i in idx], '-', color=f'C{int(n)}')\n"
            "ax1.plot(t, [d['probe_in_flux'][i] for i in idx], 'k:', label='probe in')\n"
            "ax1.set_ylabel('probe flux')\n"
            "ax1.legend(fontsize='small')\n"
            "ax2.set_ylabel('signal flux')\n"
            "ax2.set_xlabel('t (2 pi / kappa)')\n"
            "fig.savefig(os.path.join(HERE, '" << stem << ".png'), dpi=150)\n";
      break;
    }
  }
  py << "\n# tables: " << [&] {
    std::vector<std::string> names;
    for (const auto& t : o.tables) names.push_back(t.name);
    return py_list(names);
  }() << "\n";
  return py.str();
}

std::vector<std::string> emit_outputs(const RunOutputs& outputs, const std::string& dir) {
  if (outputs.tables.empty()) fail(ErrorCategory::invalid_argument, "emit_outputs: no results");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    fail(ErrorCategory::io, "cannot create output directory '" + dir + "'");
  }
  std::vector<std::string> written;
  auto write = [&](const std::string& name, auto&& body) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCategory::io, "cannot write '" + path.string() + "'");
    body(f);
    f.flush();
    if (!f) fail(ErrorCategory::io, "write failed for '" + path.string() + "'");
    written.push_back(path.string());
  };
  for (const auto& t : outputs.tables) {
    write(t.name + ".csv", [&](std::ostream& f) { write_csv(f, t); });
  }
  write("manifest.ini", [&](std::ostream& f) { f << manifest_text(outputs); });
  write("plot.py", [&](std::ostream& f) { f << plot_script(outputs); });
  return written;
}

}  // namespace qcn::experiments
