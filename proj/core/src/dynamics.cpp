#include "qcn/dynamics.hpp"

#include "qcn/error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qcn {

namespace {

const cplx kI{0.0, 1.0};

SparseMat adjoint_of(const SparseMat& m) { return SparseMat(m.adjoint()); }

}  // namespace

// ---------------------------- CompiledGenerator -----------------------------

CompiledGenerator::CompiledGenerator(const GeneratorBundle& bundle)
    : dim_(bundle.h_static.dim()), h_schedule_(bundle.h_schedule) {
  const LayoutPtr& layout = bundle.layout();
  h_eff_ = bundle.h_static.matrix();
  for (const auto& term : bundle.lindblad) {
    require_same_layout(*layout, term.op.layout(), "CompiledGenerator");
    if (term.rate < 0.0) fail(ErrorCategory::domain, "Lindblad rate must be nonnegative");
    const SparseMat& o = term.op.matrix();
    SparseMat od = adjoint_of(o);
    SparseMat odo = od * o;
    if (term.time_dependent()) {
      scheduled_.push_back({term.schedule, o, std::move(od), std::move(odo)});
    } else if (term.rate > 0.0) {
      h_eff_ -= (0.5 * term.rate * kI) * odo;
      const double s = std::sqrt(term.rate);
      SparseMat so = s * o;
      jumps_.push_back({so, adjoint_of(so)});
    }
  }
  for (const auto& link : bundle.network) {
    require_same_layout(*layout, link.source.layout(), "CompiledGenerator");
    require_same_layout(*layout, link.sink.layout(), "CompiledGenerator");
    const SparseMat& src = link.source.matrix();
    const SparseMat& sink = link.sink.matrix();
    SparseMat src_dag = adjoint_of(src);
    SparseMat sink_dag = adjoint_of(sink);
    SparseMat sink_dag_src = sink_dag * src;
    SparseMat src_dag_sink = src_dag * sink;
    links_.push_back({link.coupling, src, std::move(src_dag), sink, std::move(sink_dag),
                      std::move(sink_dag_src), std::move(src_dag_sink)});
  }
  h_eff_.makeCompressed();
  h_eff_dag_ = adjoint_of(h_eff_);
}

void CompiledGenerator::apply(const DenseMat& rho, double t, DenseMat& out) const {
  // −i(H_eff ρ − ρ H_eff†)
  out.noalias() = -kI * (h_eff_ * rho);
  out.noalias() += kI * (rho * h_eff_dag_);

  DenseMat tmp(rho.rows(), rho.cols());
  for (const auto& j : jumps_) {
    tmp.noalias() = j.op * rho;
    out.noalias() += tmp * j.op_dag;
  }
  for (const auto& j : scheduled_) {
    const double k = j.rate(t);
    if (k == 0.0) continue;
    tmp.noalias() = j.op * rho;
    out.noalias() += k * (tmp * j.op_dag);
    out.noalias() -= (0.5 * k) * (j.op_dag_op * rho);
    out.noalias() -= (0.5 * k) * (rho * j.op_dag_op);
  }
  for (const auto& l : links_) {
    const double c = l.coupling(t);
    if (c == 0.0) continue;
    // c([src ρ, sink†] + [sink, ρ src†])
    tmp.noalias() = l.src * rho;
    out.noalias() += c * (tmp * l.sink_dag);
    out.noalias() -= c * (l.sink_dag_src * rho);
    tmp.noalias() = l.sink * rho;
    out.noalias() += c * (tmp * l.src_dag);
    out.noalias() -= c * (rho * l.src_dag_sink);
  }
  if (h_schedule_) {
    const QuantumOperator h = h_schedule_(t);
    out.noalias() -= kI * (h.matrix() * rho);
    out.noalias() += kI * (rho * h.matrix());
  }
}

DenseMat lindblad_rhs(const DensityMatrix& rho, const GeneratorBundle& bundle, double t) {
  require_same_layout(rho.layout(), *bundle.layout(), "lindblad_rhs");
  CompiledGenerator gen(bundle);
  DenseMat out(rho.matrix().rows(), rho.matrix().cols());
  gen.apply(rho.matrix(), t, out);
  return out;
}

SparseMat superoperator(const GeneratorBundle& bundle) {
  if (!bundle.time_independent()) {
    fail(ErrorCategory::invalid_argument, "superoperator: bundle is time dependent");
  }
  const auto n = static_cast<Eigen::Index>(bundle.h_static.dim());
  SparseMat id(n, n);
  id.setIdentity();

  SparseMat h_eff = bundle.h_static.matrix();
  SparseMat lind(n * n, n * n);
  for (const auto& term : bundle.lindblad) {
    if (term.rate == 0.0) continue;
    const SparseMat& o = term.op.matrix();
    h_eff -= (0.5 * term.rate * kI) * SparseMat(SparseMat(o.adjoint()) * o);
    // vec(O ρ O†) = (conj(O) ⊗ O) vec(ρ)
    SparseMat oc = o.conjugate();
    lind += term.rate * SparseMat(Eigen::kroneckerProduct(oc, o));
  }
  // vec(Aρ) = (I ⊗ A) vec(ρ); vec(ρB) = (Bᵀ ⊗ I) vec(ρ)
  SparseMat left = Eigen::kroneckerProduct(id, h_eff);
  SparseMat h_eff_dag_t = SparseMat(h_eff.adjoint()).transpose();
  SparseMat right = Eigen::kroneckerProduct(h_eff_dag_t, id);
  SparseMat L = (-kI) * left + kI * right + lind;
  L.makeCompressed();
  return L;
}

// --------------------------------- evolve -----------------------------------

std::vector<double> EvolutionResult::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    fail(ErrorCategory::invalid_argument, "EvolutionResult: no observable named '" + name + "'");
  }
  const auto j = static_cast<std::size_t>(it - names.begin());
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row[j]);
  return out;
}

std::vector<double> linear_grid(double t0, double t1, std::size_t n) {
  if (n < 2) fail(ErrorCategory::invalid_argument, "linear_grid: need at least two points");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  g.back() = t1;
  return g;
}

EvolutionResult evolve(const DensityMatrix& rho0, const GeneratorBundle& bundle,
                       const std::vector<double>& t_grid, const std::vector<Observable>& observables,
                       const EvolveOptions& opts) {
  require_same_layout(rho0.layout(), *bundle.layout(), "evolve");
  for (const auto& obs : observables) require_same_layout(obs.op.layout(), rho0.layout(), "evolve");
  if (t_grid.empty()) fail(ErrorCategory::invalid_argument, "evolve: empty time grid");

  const CompiledGenerator gen(bundle);
  EvolutionResult result{{}, {}, {}, 0.0, std::nullopt, rho0, {}};
  for (const auto& obs : observables) result.names.push_back(obs.name);
  result.times.reserve(t_grid.size());
  result.values.reserve(t_grid.size());

  double min_eig = std::numeric_limits<double>::infinity();
  auto track_trace = [&](double t, const DenseMat& y) {
    const double drift = std::abs(y.trace() - cplx(1.0, 0.0));
    result.trace_drift = std::max(result.trace_drift, drift);
    if (drift > opts.trace_tolerance) {
      std::ostringstream os;
      os << "evolve: trace drift " << drift << " at t = " << t << " exceeds "
         << opts.trace_tolerance;
      fail(ErrorCategory::solver, os.str());
    }
  };

  auto sample = [&](double t, const DenseMat& y) {
    track_trace(t, y);
    std::vector<double> row;
    row.reserve(observables.size());
    for (const auto& obs : observables) {
      const cplx v = expect(obs.op.matrix(), y);
      if (std::abs(v.imag()) > 1e-9) {
        std::ostringstream os;
        os << "evolve: observable '" << obs.name << "' has imaginary part " << v.imag()
           << " at t = " << t;
        fail(ErrorCategory::domain, os.str());
      }
      row.push_back(v.real());
    }
    result.times.push_back(t);
    result.values.push_back(std::move(row));
    if (opts.track_positivity) {
      DensityMatrix snapshot(rho0.layout_ptr(), y);
      min_eig = std::min(min_eig, snapshot.min_eigenvalue());
    }
  };

  // The generator preserves hermiticity, so projecting the FSAL stage keeps it
  // equal to the right-hand side of the projected state.
  auto on_step = [&](double t, DenseMat& y, DenseMat& dy) {
    y = 0.5 * (y + y.adjoint()).eval();
    dy = 0.5 * (dy + dy.adjoint()).eval();
    track_trace(t, y);
  };

  OdeOptions ode;
  ode.rtol = opts.rtol;
  ode.atol = opts.atol;
  ode.max_step = opts.max_step;
  Dopri5 solver([&gen](double t, const DenseMat& y, DenseMat& dy) { gen.apply(y, t, dy); }, ode);

  DenseMat y0 = rho0.matrix();
  DenseMat yf = solver.integrate(std::move(y0), t_grid, sample, on_step);
  result.final_rho = DensityMatrix(rho0.layout_ptr(), std::move(yf));
  result.stats = solver.stats();
  if (opts.track_positivity) result.min_eigenvalue = min_eig;
  return result;
}

// ------------------------------ steady state --------------------------------

std::string to_string(SteadyMethod method) {
  return method == SteadyMethod::nullspace ? "nullspace" : "long_time";
}

namespace {

double residual_norm(const CompiledGenerator& gen, const DenseMat& rho) {
  DenseMat out(rho.rows(), rho.cols());
  gen.apply(rho, 0.0, out);
  return out.norm();
}

void finalize(DenseMat& rho) {
  // Fix the global phase on the largest-magnitude diagonal element.
  Eigen::Index k = 0;
  rho.diagonal().cwiseAbs().maxCoeff(&k);
  const cplx d = rho(k, k);
  if (std::abs(d) > 0.0) rho *= std::conj(d) / std::abs(d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
}

double one_norm(const SparseMat& a) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMat::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

// Hager–Higham estimate of ||A⁻¹||₁ from the factorization.
template <typename Solver>
double inverse_one_norm(Solver& lu, Eigen::Index n) {
  Eigen::VectorXcd x = Eigen::VectorXcd::Constant(n, cplx(1.0 / static_cast<double>(n), 0.0));
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    Eigen::VectorXcd y = lu.solve(x);
    if (!y.allFinite()) return std::numeric_limits<double>::infinity();
    const double est = y.cwiseAbs().sum();
    if (iter > 0 && est <= estimate) break;
    estimate = est;
    Eigen::VectorXcd xi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::abs(y[i]);
      xi[i] = m > 0.0 ? y[i] / m : cplx(1.0, 0.0);
    }
    Eigen::VectorXcd z = lu.adjoint().solve(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= std::real(z.dot(x))) break;
    x.setZero();
    x[j] = 1.0;
  }
  return estimate;
}

// GMRES with an incomplete-LU preconditioner, for Liouvillians too large for a
// direct factorization. Exposes the solve()/adjoint().solve() pair used by the
// condition estimate.
class IterativeSolver {
 public:
  explicit IterativeSolver(const SparseMat& a) : a_(a), a_dag_(a.adjoint()) {}

  bool compute() {
    setup(fwd_);
    fwd_.compute(a_);
    return fwd_.info() == Eigen::Success;
  }

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) {
    Eigen::VectorXcd x = fwd_.solve(b);
    if (fwd_.info() != Eigen::Success) ok_ = false;
    return x;
  }

  struct Adjoint {
    IterativeSolver* self;
    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const { return self->solve_adjoint(b); }
  };
  Adjoint adjoint() { return {this}; }

  bool ok() const { return ok_; }

 private:
  using Gmres = Eigen::GMRES<SparseMat, Eigen::IncompleteLUT<cplx>>;

  static void setup(Gmres& s) {
    s.preconditioner().setDroptol(1e-3);
    s.preconditioner().setFillfactor(10);
    s.setTolerance(1e-13);
    s.set_restart(100);
    s.setMaxIterations(2000);
  }

  Eigen::VectorXcd solve_adjoint(const Eigen::VectorXcd& b) {
    if (!bwd_ready_) {
      setup(bwd_);
      bwd_.compute(a_dag_);
      bwd_ready_ = true;
    }
    Eigen::VectorXcd x = bwd_.solve(b);
    if (bwd_.info() != Eigen::Success) ok_ = false;
    return x;
  }

  SparseMat a_;
  SparseMat a_dag_;
  Gmres fwd_;
  Gmres bwd_;
  bool bwd_ready_{false};
  bool ok_{true};
};

// Above this many unknowns the direct factorization fills in badly.
constexpr Eigen::Index kIterativeThreshold = 700;

double smallest_rate(const GeneratorBundle& bundle) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& term : bundle.lindblad) {
    if (term.rate > 0.0) r = std::min(r, term.rate);
  }
  return r;
}

DenseMat long_time_state(const GeneratorBundle& bundle, const DensityMatrix& start, double t_end,
                         double rtol) {
  EvolveOptions opts;
  opts.rtol = rtol;
  opts.atol = 1e-12;
  const auto run = evolve(start, bundle, {0.0, t_end}, {}, opts);
  return run.final_rho.matrix();
}

}  // namespace

SteadyStateResult steady_state(const GeneratorBundle& bundle, const SteadyOptions& opts) {
  if (!bundle.time_independent()) {
    fail(ErrorCategory::invalid_argument, "steady_state: bundle must be time independent");
  }
  const LayoutPtr& layout = bundle.layout();
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  const CompiledGenerator gen(bundle);

  double cond = std::numeric_limits<double>::infinity();
  if (!opts.force_long_time) {
    const SparseMat L = superoperator(bundle);
    // Row 0 (the ρ₀₀ equation) is replaced by the trace constraint.
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(L.nonZeros() + n));
    for (Eigen::Index k = 0; k < L.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(L, k); it; ++it) {
        if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(0, i * n + i, cplx(1.0, 0.0));
    SparseMat A(n * n, n * n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
    rhs[0] = 1.0;
    std::optional<Eigen::VectorXcd> v;
    if (n * n > kIterativeThreshold) {
      IterativeSolver it(A);
      if (it.compute()) {
        Eigen::VectorXcd x = it.solve(rhs);
        const double c = one_norm(A) * inverse_one_norm(it, n * n);
        if (it.ok() && x.allFinite()) {
          cond = c;
          if (cond < opts.condition_threshold) v = std::move(x);
        }
      }
    }
    if (!v && !(std::isfinite(cond) && cond >= opts.condition_threshold)) {
      Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
      lu.analyzePattern(A);
      lu.factorize(A);
      if (lu.info() == Eigen::Success) {
        cond = one_norm(A) * inverse_one_norm(lu, n * n);
        if (cond < opts.condition_threshold) v = lu.solve(rhs);
      }
    }
    if (v) {
      DenseMat rho = Eigen::Map<const DenseMat>(v->data(), n, n);
      finalize(rho);
      const double res = residual_norm(gen, rho);
      return {DensityMatrix(layout, std::move(rho)), res, SteadyMethod::nullspace, cond};
    }
  }

  // Long-time integration from two different initial states; disagreement
  // means the stationary state is not unique.
  const double rate = smallest_rate(bundle);
  if (!std::isfinite(rate)) {
    fail(ErrorCategory::solver, "steady_state: non-unique steady state (no dissipation)");
  }
  const double t_end = opts.long_time_factor / rate;
  DenseMat r1 = long_time_state(bundle, DensityMatrix::basis_state(layout, {}), t_end,
                                opts.long_time_rtol);
  DenseMat r2 = long_time_state(bundle, DensityMatrix::maximally_mixed(layout), t_end,
                                opts.long_time_rtol);
  finalize(r1);
  finalize(r2);
  DensityMatrix s1(layout, r1);
  const double spread = trace_distance(s1, DensityMatrix(layout, r2));
  if (spread > 1e-6) {
    std::ostringstream os;
    os << "steady_state: non-unique steady state (long-time states differ by " << spread
       << " in trace distance)";
    fail(ErrorCategory::solver, os.str());
  }
  const double res = residual_norm(gen, r1);
  return {std::move(s1), res, SteadyMethod::long_time, cond};
}

Transmittance transmittance_steady(const SteadyStateResult& ss, const QcnParams& params,
                                   const Frame& frame) {
  const auto obs = steady_observables(ss, params, frame);
  return {obs.T_a, obs.T_b};
}

SteadyObservables steady_observables(const SteadyStateResult& ss, const QcnParams& params,
                                     const Frame& frame) {
  const LayoutPtr& layout = ss.rho.layout_ptr();
  SteadyObservables o;
  o.n_a = expect_real(lab_number(layout, Subsystem::cav_a, frame), ss.rho);
  o.n_b = expect_real(lab_number(layout, Subsystem::cav_b, frame), ss.rho);
  o.sigma22 = expect_real(transition(layout, 2, 2), ss.rho);
  o.sigma33 = expect_real(transition(layout, 3, 3), ss.rho);
  const double a2 = std::norm(params.alpha);
  const double b2 = std::norm(params.beta);
  if (a2 > 0.0) o.T_a = params.kappa_ex[1] * o.n_a / a2;
  if (b2 > 0.0) o.T_b = params.kappa_ex[3] * o.n_b / b2;
  return o;
}

// ------------------------------ pulse metrics -------------------------------

std::vector<Observable> cascade_observables(const LayoutPtr& layout, ProbeMode mode) {
  const QuantumOperator d1 = destroy(layout, Subsystem::src_d1);
  const QuantumOperator a = destroy(layout, Subsystem::cav_a);
  const QuantumOperator b = destroy(layout, Subsystem::cav_b);
  std::vector<Observable> obs{
      {kObsNd1, d1.adjoint() * d1},
      {kObsNa, a.adjoint() * a},
      {kObsXd1a, d1.adjoint() * a + a.adjoint() * d1},
      {kObsNb, b.adjoint() * b},
      {kObsBx, b + b.adjoint()},
      {kObsBy, -kI * (b - b.adjoint())},
      {kObsS22, transition(layout, 2, 2)},
      {kObsS33, transition(layout, 3, 3)},
  };
  if (mode == ProbeMode::cascaded_source) {
    const QuantumOperator d2 = destroy(layout, Subsystem::src_d2);
    obs.push_back({kObsNd2, d2.adjoint() * d2});
    obs.push_back({kObsXd2b, d2.adjoint() * b + b.adjoint() * d2});
  }
  return obs;
}

CascadeFluxes cascade_fluxes(const EvolutionResult& run, const QcnParams& params,
                             const CascadeSpec& spec, const PulseSchedule& schedule) {
  const auto nd1 = run.column(kObsNd1);
  const auto na = run.column(kObsNa);
  const auto xd1a = run.column(kObsXd1a);
  const auto nb = run.column(kObsNb);
  const double k1 = params.kappa_ex[0];
  const double k2 = params.kappa_ex[1];
  const double k3 = params.kappa_ex[2];
  const double k4 = params.kappa_ex[3];

  CascadeFluxes f;
  f.times = run.times;
  const std::size_t n = run.times.size();
  std::vector<double> bx, by, nd2, xd2b;
  const bool cascaded_probe = spec.probe_mode == ProbeMode::cascaded_source;
  if (cascaded_probe) {
    nd2 = run.column(kObsNd2);
    xd2b = run.column(kObsXd2b);
  } else {
    bx = run.column(kObsBx);
    by = run.column(kObsBy);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double kd = schedule.coupling(run.times[i]);
    f.signal_in.push_back(kd * nd1[i]);
    f.signal_out.push_back(kd * nd1[i] + k1 * na[i] + std::sqrt(kd * k1) * xd1a[i]);
    f.signal_transmitted.push_back(k2 * na[i]);
    f.probe_out.push_back(k4 * nb[i]);
    if (cascaded_probe) {
      const double kd2 = spec.kappa_d2;
      f.probe_in.push_back(kd2 * nd2[i]);
      f.probe_reflected.push_back(kd2 * nd2[i] + k3 * nb[i] + std::sqrt(kd2 * k3) * xd2b[i]);
    } else {
      // b_r = β + √κ_ex,3 b
      const cplx b_mean(0.5 * bx[i], 0.5 * by[i]);
      const double in = std::norm(params.beta);
      f.probe_in.push_back(in);
      f.probe_reflected.push_back(in + k3 * nb[i] +
                                  2.0 * std::sqrt(k3) * std::real(std::conj(params.beta) * b_mean));
    }
  }
  return f;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f, double t0, double t1) {
  double acc = 0.0;
  bool have_prev = false;
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (have_prev) acc += 0.5 * (t[i] - tp) * (f[i] + fp);
    tp = t[i];
    fp = f[i];
    have_prev = true;
  }
  return acc;
}

PulseMetrics pulse_metrics(const EvolutionResult& run, const QcnParams& params,
                           const CascadeSpec& spec, const PulseSchedule& schedule, double t0,
                           double t1) {
  if (!(t1 > t0)) fail(ErrorCategory::invalid_argument, "pulse_metrics: empty window");
  const CascadeFluxes f = cascade_fluxes(run, params, spec, schedule);

  PulseMetrics m;
  m.input_photons = trapezoid(f.times, f.signal_in, t0, t1);

  const double probe_in = trapezoid(f.times, f.probe_in, t0, t1);
  if (probe_in > 0.0) {
    m.T_b = trapezoid(f.times, f.probe_out, t0, t1) / probe_in;
    m.R_b = trapezoid(f.times, f.probe_reflected, t0, t1) / probe_in;
  }
  if (spec.n_s == 0) return m;

  const double outside = 1.0 - (schedule.emitted_fraction(t1) - schedule.emitted_fraction(t0));
  if (outside > 1e-3) {
    std::ostringstream os;
    os << "pulse_metrics: window [" << t0 << ", " << t1 << "] misses " << outside * 100.0
       << "% of the packet energy";
    fail(ErrorCategory::domain, os.str());
  }
  if (m.input_photons > 0.0) {
    m.T_a = trapezoid(f.times, f.signal_transmitted, t0, t1) / m.input_photons;
    m.R_a = trapezoid(f.times, f.signal_out, t0, t1) / m.input_photons;
  }
  return m;
}

}  // namespace qcn
