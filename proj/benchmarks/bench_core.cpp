#include "qcn/dynamics.hpp"
#include "qcn/model.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace qcn;

LayoutPtr qab(int n) {
  return make_layout({{Subsystem::qe, 3}, {Subsystem::cav_a, n}, {Subsystem::cav_b, n}});
}

void BM_SteadyState(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const QcnParams p = QcnParams::fig2(1e-2, 1e-2);
  const auto bundle = build_system(p, qab(n), Frame::displaced(p));
  for (auto _ : state) benchmark::DoNotOptimize(steady_state(bundle));
  state.counters["dim"] = static_cast<double>(3 * n * n);
}
BENCHMARK(BM_SteadyState)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

// One right-hand-side evaluation of the cascaded model.
void BM_CascadeRhs(benchmark::State& state) {
  const auto nb = static_cast<int>(state.range(0));
  CascadeSpec spec;
  spec.n_s = 3;
  const double t_end = 2.0 * 3.14159265358979323846 * 250.0;
  const auto sched = pulse_coupling_schedule(spec.pulse, spec.kappa_d1_ex2_max, {0.0, t_end});
  const auto l = make_layout(
      {{Subsystem::qe, 3}, {Subsystem::src_d1, 4}, {Subsystem::cav_a, 4}, {Subsystem::cav_b, nb}});
  const CompiledGenerator gen(build_cascaded(QcnParams::fig4(), spec, sched, l));
  const DenseMat rho = cascaded_initial_state(spec, l).matrix();
  DenseMat out(rho.rows(), rho.cols());
  for (auto _ : state) {
    gen.apply(rho, spec.pulse.delay, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["dim"] = static_cast<double>(rho.rows());
}
BENCHMARK(BM_CascadeRhs)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
