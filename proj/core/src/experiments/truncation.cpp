#include "qcn/experiments/truncation.hpp"

#include "qcn/error.hpp"
#include "qcn/experiments/scenarios.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace qcn::experiments {

int& TruncationLevels::operator[](Subsystem s) {
  switch (s) {
    case Subsystem::cav_a: return n_a;
    case Subsystem::cav_b: return n_b;
    case Subsystem::src_d1: return n_d1;
    case Subsystem::src_d2: return n_d2;
    case Subsystem::qe: break;
  }
  fail(ErrorCategory::invalid_argument, "truncation: the emitter has no Fock truncation");
}

int TruncationLevels::operator[](Subsystem s) const {
  return (*const_cast<TruncationLevels*>(this))[s];
}

double TruncationReport::max_delta() const {
  double m = 0.0;
  for (double d : deltas) {
    if (std::isnan(d)) return std::numeric_limits<double>::quiet_NaN();
    m = std::max(m, d);
  }
  return m;
}

std::string TruncationReport::describe() const {
  std::ostringstream os;
  os.precision(3);
  os << (automatic ? "auto" : "fixed") << " n_a=" << levels.n_a << " n_b=" << levels.n_b
     << " n_d1=" << levels.n_d1 << " n_d2=" << levels.n_d2 << " dim=" << dimension;
  if (automatic) {
    os << " evaluations=" << evaluations << " max_delta=" << max_delta();
  }
  return os.str();
}

TruncationLevels fixed_levels(const TruncationSpec& spec) {
  return {spec.n_a, spec.n_b, spec.n_d1, spec.n_d2};
}

TruncationReport converge_levels(const TruncationSpec& spec, TruncationLevels start,
                                 const std::vector<Subsystem>& varied,
                                 const std::vector<std::string>& observables,
                                 const LevelEvaluator& evaluate, const DimensionOf& dimension) {
  TruncationReport report;
  report.automatic = spec.automatic;
  report.varied = varied;
  report.observables = observables;

  std::map<TruncationLevels, std::vector<double>> cache;
  auto eval = [&](const TruncationLevels& lv) -> const std::vector<double>& {
    auto it = cache.find(lv);
    if (it == cache.end()) {
      auto values = evaluate(lv);
      if (values.size() != observables.size()) {
        fail(ErrorCategory::invalid_argument, "truncation: evaluator returned wrong arity");
      }
      ++report.evaluations;
      it = cache.emplace(lv, std::move(values)).first;
    }
    return it->second;
  };

  if (!spec.automatic) {
    report.levels = start;
    report.dimension = dimension(start);
    if (report.dimension > spec.max_dim) {
      std::ostringstream os;
      os << "truncation: fixed levels give dimension " << report.dimension << " above the cap "
         << spec.max_dim;
      fail(ErrorCategory::solver, os.str());
    }
    report.values = eval(start);
    report.deltas.assign(observables.size(), std::numeric_limits<double>::quiet_NaN());
    return report;
  }

  TruncationLevels levels = start;
  for (;;) {
    const std::vector<double> base = eval(levels);
    std::vector<double> deltas(observables.size(), 0.0);
    std::vector<Subsystem> grow;
    for (Subsystem m : varied) {
      TruncationLevels up = levels;
      ++up[m];
      if (dimension(up) > spec.max_dim) {
        std::ostringstream os;
        os << "truncation: no convergence within total dimension " << spec.max_dim << " (mode "
           << to_string(m) << " at level " << levels[m] << ")";
        fail(ErrorCategory::solver, os.str());
      }
      const std::vector<double>& next = eval(up);
      bool converged = true;
      for (std::size_t k = 0; k < base.size(); ++k) {
        if (std::isnan(base[k]) && std::isnan(next[k])) continue;
        const double d = std::abs(next[k] - base[k]);
        if (!(d < spec.tolerance)) converged = false;
        deltas[k] = std::max(deltas[k], std::isnan(d) ? std::numeric_limits<double>::infinity() : d);
      }
      if (!converged) grow.push_back(m);
    }
    if (grow.empty()) {
      report.levels = levels;
      report.values = base;
      report.deltas = deltas;
      report.dimension = dimension(levels);
      return report;
    }
    for (Subsystem m : grow) ++levels[m];
  }
}

LayoutPtr steady_layout(const TruncationLevels& levels) {
  return make_layout({{Subsystem::qe, 3},
                      {Subsystem::cav_a, levels.n_a + 1},
                      {Subsystem::cav_b, levels.n_b + 1}});
}

TruncationReport converge_truncation(const RunConfig& config) {
  return solve_steady_point(config, config.params).truncation;
}

}  // namespace qcn::experiments
