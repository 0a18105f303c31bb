#include "qcn/experiments/scenarios.hpp"

#include "qcn/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace qcn::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, n) on up to `jobs` threads. The first failure in
// index order is rethrown after all workers finish, prefixed by label(i).
template <typename Body, typename Label>
void parallel_for(std::size_t n, int jobs, Body body, Label label) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.category(), label(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCategory::solver, label(i) + ": " + e.what());
    }
  }
}

std::string cell_label(double alpha2, double beta2) {
  std::ostringstream os;
  os << "cell |alpha|^2=" << alpha2 << " |beta|^2=" << beta2;
  return os.str();
}

QcnParams with_drives(QcnParams p, double alpha2, double beta2) {
  p.alpha = std::sqrt(alpha2);
  p.beta = std::sqrt(beta2);
  return p;
}

double opt_or_nan(const std::optional<double>& x) { return x ? *x : kNaN; }

}  // namespace

SteadyPoint solve_steady_point(const RunConfig& config, const QcnParams& params) {
  validate(params);
  const Frame frame =
      config.frame == FrameMode::displaced ? Frame::displaced(params) : Frame::lab();

  SteadyPoint point;
  point.alpha2 = std::norm(params.alpha);
  point.beta2 = std::norm(params.beta);

  struct Solved {
    SteadyObservables obs;
    double residual;
    SteadyMethod method;
  };
  std::map<TruncationLevels, Solved> solved;
  auto evaluate = [&](const TruncationLevels& lv) {
    const LayoutPtr layout = steady_layout(lv);
    const SteadyStateResult ss = steady_state(build_system(params, layout, frame));
    const SteadyObservables o = steady_observables(ss, params, frame);
    solved[lv] = {o, ss.residual, ss.method};
    return std::vector<double>{opt_or_nan(o.T_a), opt_or_nan(o.T_b), o.sigma22, o.sigma33};
  };
  auto dimension = [](const TruncationLevels& lv) {
    return static_cast<std::size_t>(3 * (lv.n_a + 1) * (lv.n_b + 1));
  };

  TruncationLevels start = fixed_levels(config.truncation);
  if (config.truncation.automatic) {
    start.n_a = start.n_b = config.truncation.min_level;
  }
  point.truncation = converge_levels(config.truncation, start, {Subsystem::cav_a, Subsystem::cav_b},
                                     {"T_a", "T_b", "sigma22", "sigma33"}, evaluate, dimension);
  const Solved& s = solved.at(point.truncation.levels);
  point.numeric = s.obs;
  point.residual = s.residual;
  point.method = s.method;

  try {
    const auto in = analytic::AnalyticInputs::from_params(params);
    point.T_analytic = analytic::transmissions(in);
    point.populations_analytic = analytic::populations(in);
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::domain) throw;
  }
  return point;
}

SteadyPoint run_steady(const RunConfig& config) {
  validate(config);
  return solve_steady_point(config, config.params);
}

SweepTable run_sweep2d(const RunConfig& config) {
  validate(config);
  SweepTable table;
  table.alpha2 = config.alpha2_axis.values();
  table.beta2 = config.beta2_axis.values();
  const std::size_t nb = table.beta2.size();
  table.cells.resize(table.alpha2.size() * nb);
  parallel_for(
      table.cells.size(), config.jobs,
      [&](std::size_t k) {
        const QcnParams p = with_drives(config.params, table.alpha2[k / nb], table.beta2[k % nb]);
        table.cells[k] = solve_steady_point(config, p);
        table.cells[k].alpha2 = table.alpha2[k / nb];
        table.cells[k].beta2 = table.beta2[k % nb];
      },
      [&](std::size_t k) { return cell_label(table.alpha2[k / nb], table.beta2[k % nb]); });
  return table;
}

Fig2Result run_fig2(const RunConfig& config) {
  Fig2Result r;
  r.grid = run_sweep2d(config);
  const auto& alphas = r.grid.alpha2;
  const std::size_t na = alphas.size();
  r.cuts.resize(config.cut_beta2.size() * na);
  parallel_for(
      r.cuts.size(), config.jobs,
      [&](std::size_t k) {
        const QcnParams p = with_drives(config.params, alphas[k % na], config.cut_beta2[k / na]);
        r.cuts[k] = solve_steady_point(config, p);
        r.cuts[k].alpha2 = alphas[k % na];
        r.cuts[k].beta2 = config.cut_beta2[k / na];
      },
      [&](std::size_t k) { return cell_label(alphas[k % na], config.cut_beta2[k / na]); });
  return r;
}

Fig3Result run_fig3(const RunConfig& config) {
  validate(config);
  std::vector<double> betas{0.0};
  for (double b : config.fig3.beta2.values()) betas.push_back(b);
  Fig3Result r;
  r.points.resize(betas.size());
  parallel_for(
      betas.size(), config.jobs,
      [&](std::size_t k) {
        r.points[k] =
            solve_steady_point(config, with_drives(config.params, config.fig3.alpha2, betas[k]));
        r.points[k].alpha2 = config.fig3.alpha2;
        r.points[k].beta2 = betas[k];
      },
      [&](std::size_t k) { return cell_label(config.fig3.alpha2, betas[k]); });
  return r;
}

namespace {

LayoutPtr cascade_layout(const CascadeSpec& spec, const TruncationLevels& lv) {
  std::vector<SubsystemSpec> specs{{Subsystem::qe, 3},
                                   {Subsystem::src_d1, lv.n_d1 + 1},
                                   {Subsystem::cav_a, lv.n_a + 1},
                                   {Subsystem::cav_b, lv.n_b + 1}};
  if (spec.probe_mode == ProbeMode::cascaded_source) {
    specs.push_back({Subsystem::src_d2, lv.n_d2 + 1});
  }
  return make_layout(std::move(specs));
}

std::size_t cascade_dimension(const CascadeSpec& spec, const TruncationLevels& lv) {
  std::size_t d = 3u * static_cast<std::size_t>((lv.n_d1 + 1) * (lv.n_a + 1) * (lv.n_b + 1));
  if (spec.probe_mode == ProbeMode::cascaded_source) d *= static_cast<std::size_t>(lv.n_d2 + 1);
  return d;
}

struct PulseRun {
  Fig4Run run;
  std::vector<std::string> warnings;
};

PulseRun pulse_once(const RunConfig& config, int n_s, const TruncationLevels& levels) {
  CascadeSpec spec = *config.cascade;
  spec.n_s = n_s;
  const auto& f4 = config.fig4;
  const PulseSchedule schedule =
      pulse_coupling_schedule(spec.pulse, spec.kappa_d1_ex2_max, {0.0, f4.t_end});
  const LayoutPtr layout = cascade_layout(spec, levels);
  const GeneratorBundle bundle = build_cascaded(config.params, spec, schedule, layout);

  const auto steps = static_cast<std::size_t>(std::llround(f4.t_end / f4.grid_step));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) grid[i] = f4.t_end * static_cast<double>(i) / steps;

  EvolveOptions opts;
  opts.rtol = config.rtol;
  opts.atol = std::min(1e-10, 1e-2 * config.rtol);
  opts.max_step = f4.grid_step;
  const EvolutionResult ev = evolve(cascaded_initial_state(spec, layout), bundle, grid,
                                    cascade_observables(layout, spec.probe_mode), opts);

  PulseRun out;
  Fig4Run& r = out.run;
  r.n_s = n_s;
  r.trace_drift = ev.trace_drift;
  r.fluxes = cascade_fluxes(ev, config.params, spec, schedule);

  const double tau_d = spec.pulse.delay;
  const double tau_s = spec.pulse.duration;
  const double m0 = tau_d - f4.metric_halfwidth * tau_s;
  const double m1 = tau_d + f4.metric_halfwidth * tau_s;
  const PulseMetrics m = pulse_metrics(ev, config.params, spec, schedule, m0, m1);
  r.R_a = m.R_a;
  r.T_a = m.T_a;
  r.input_photons = m.input_photons;

  const double p0 = tau_d - f4.probe_halfwidth * tau_s;
  const double p1 = tau_d + f4.probe_halfwidth * tau_s;
  const double probe_in = trapezoid(r.fluxes.times, r.fluxes.probe_in, p0, p1);
  r.Tb_windowed = probe_in > 0.0 ? trapezoid(r.fluxes.times, r.fluxes.probe_out, p0, p1) / probe_in
                                 : kNaN;
  r.Tb_peak = 0.0;
  for (std::size_t i = 0; i < r.fluxes.times.size(); ++i) {
    const double t = r.fluxes.times[i];
    if (t < m0 || t > m1 || !(r.fluxes.probe_in[i] > 0.0)) continue;
    r.Tb_peak = std::max(r.Tb_peak, r.fluxes.probe_out[i] / r.fluxes.probe_in[i]);
  }

  for (const auto& w : schedule.diagnostics()) out.warnings.push_back(w);
  for (const auto& w : validate(config.params).warnings) out.warnings.push_back(w);
  return out;
}

}  // namespace

Fig4Run run_pulse(const RunConfig& config, int n_s, const TruncationLevels& levels) {
  if (!config.cascade) fail(ErrorCategory::config, "pulse run needs a cascade spec");
  return pulse_once(config, n_s, levels).run;
}

Fig4Result run_fig4(const RunConfig& config) {
  validate(config);
  if (!config.cascade) fail(ErrorCategory::config, "fig4 needs a cascade spec");
  const CascadeSpec& spec = *config.cascade;
  Fig4Result result;

  const auto& ns = config.fig4.photon_numbers;
  std::vector<PulseRun> runs(ns.size());
  parallel_for(
      ns.size(), config.jobs,
      [&](std::size_t k) {
        const int n_s = ns[k];
        // Signal photons never exceed n_s in d1 or a; the probe modes are laddered.
        TruncationLevels start = fixed_levels(config.truncation);
        std::vector<Subsystem> varied;
        if (config.truncation.automatic) {
          start.n_d1 = start.n_a = std::max(n_s, 1);
          start.n_b = config.truncation.min_level;
          start.n_d2 = config.truncation.min_level;
          varied.push_back(Subsystem::cav_b);
          if (spec.probe_mode == ProbeMode::cascaded_source) varied.push_back(Subsystem::src_d2);
        }
        std::map<TruncationLevels, PulseRun> done;
        auto evaluate = [&](const TruncationLevels& lv) {
          PulseRun pr = pulse_once(config, n_s, lv);
          std::vector<double> v{pr.run.Tb_windowed, pr.run.Tb_peak, opt_or_nan(pr.run.R_a),
                                opt_or_nan(pr.run.T_a)};
          done[lv] = std::move(pr);
          return v;
        };
        const TruncationReport rep = converge_levels(
            config.truncation, start, varied, {"Tb_windowed", "Tb_peak", "R_a", "T_a"}, evaluate,
            [&](const TruncationLevels& lv) { return cascade_dimension(spec, lv); });
        runs[k] = std::move(done.at(rep.levels));
        runs[k].run.truncation = rep;
      },
      [&](std::size_t k) { return "n_s=" + std::to_string(ns[k]); });

  for (auto& pr : runs) {
    result.runs.push_back(std::move(pr.run));
    for (auto& w : pr.warnings) {
      if (std::find(result.warnings.begin(), result.warnings.end(), w) == result.warnings.end()) {
        result.warnings.push_back(std::move(w));
      }
    }
  }

  // Undisturbed probe transmission from the steady state of the driven system.
  QcnParams bare = config.params;
  bare.alpha = 0.0;
  RunConfig steady_cfg = config;
  steady_cfg.frame = FrameMode::lab;
  const SteadyPoint sp = solve_steady_point(steady_cfg, bare);
  result.Tb_steady = opt_or_nan(sp.numeric.T_b);
  return result;
}

QcnParams Rb87Rates::to_params() const {
  const double k = kappa_unit();
  QcnParams p;
  p.g1 = p.g2 = g / k;
  p.kappa_ex = {kappa_ex1 / k, kappa_ex2 / k, kappa_ex3 / k, kappa_ex4 / k};
  p.kappa_in_a = p.kappa_in_b = kappa_in / k;
  p.gamma21 = p.gamma31 = gamma / k;
  p.alpha = 0.0;
  p.beta = std::sqrt(1e-2);
  return p;
}

QcnParams rb87_params() { return Rb87Rates{}.to_params(); }

Rb87Result preset_rb87(const RunConfig& config) {
  Rb87Result r;
  r.fig4 = run_fig4(config);
  for (const auto& run : r.fig4.runs) {
    if (run.n_s == 1) r.survival = run.R_a;
  }
  return r;
}

}  // namespace qcn::experiments
