#include "qcn/model.hpp"

#include "qcn/error.hpp"

#include <cmath>
#include <sstream>

namespace qcn {

namespace {

const cplx kI{0.0, 1.0};

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require(const LayoutPtr& layout, Subsystem s, std::string_view context) {
  if (!layout->contains(s)) {
    fail(ErrorCategory::invalid_argument,
         std::string(context) + ": layout lacks " + std::string(to_string(s)));
  }
}

}  // namespace

QcnParams QcnParams::swapped() const {
  QcnParams p = *this;
  std::swap(p.g1, p.g2);
  p.kappa_ex = {kappa_ex[2], kappa_ex[3], kappa_ex[0], kappa_ex[1]};
  std::swap(p.kappa_in_a, p.kappa_in_b);
  std::swap(p.gamma21, p.gamma31);
  std::swap(p.delta1, p.delta2);
  std::swap(p.delta_a, p.delta_b);
  std::swap(p.alpha, p.beta);
  return p;
}

QcnParams QcnParams::fig2(double alpha2, double beta2) {
  QcnParams p;
  p.alpha = std::sqrt(alpha2);
  p.beta = std::sqrt(beta2);
  return p;
}

QcnParams QcnParams::fig4() {
  QcnParams p;
  p.kappa_ex = {1.0, 0.0, 0.5, 0.5};
  p.beta = std::sqrt(1e-2);
  return p;
}

Diagnostics validate(const QcnParams& p) {
  const std::array<std::pair<const char*, double>, 9> rates{{
      {"kappa_ex1", p.kappa_ex[0]},
      {"kappa_ex2", p.kappa_ex[1]},
      {"kappa_ex3", p.kappa_ex[2]},
      {"kappa_ex4", p.kappa_ex[3]},
      {"kappa_in_a", p.kappa_in_a},
      {"kappa_in_b", p.kappa_in_b},
      {"gamma21", p.gamma21},
      {"gamma31", p.gamma31},
      {"g1", p.g1},
  }};
  for (const auto& [name, value] : rates) {
    if (!std::isfinite(value)) fail(ErrorCategory::domain, std::string(name) + " is not finite");
    if (value < 0.0) fail(ErrorCategory::domain, std::string(name) + " is negative");
  }
  if (!std::isfinite(p.g2) || p.g2 < 0.0) fail(ErrorCategory::domain, "g2 is negative or not finite");
  for (double d : {p.delta1, p.delta2, p.delta_a, p.delta_b}) {
    if (!std::isfinite(d)) fail(ErrorCategory::domain, "detuning is not finite");
  }
  if (!finite(p.alpha) || !finite(p.beta)) fail(ErrorCategory::domain, "drive amplitude is NaN");
  if (!(p.kappa_a() > 0.0) || !(p.kappa_b() > 0.0)) {
    fail(ErrorCategory::domain, "total cavity loss must be positive");
  }

  Diagnostics d;
  auto warn = [&](const std::string& what, double value) {
    std::ostringstream os;
    os << "QND regime violated: " << what << " = " << value << " exceeds 0.1 kappa_a = "
       << 0.1 * p.kappa_a();
    d.warnings.push_back(os.str());
  };
  if (p.gamma21 > 0.1 * p.kappa_a()) warn("gamma21", p.gamma21);
  if (p.kappa_in_a > 0.1 * p.kappa_a()) warn("kappa_in_a", p.kappa_in_a);
  return d;
}

// ---------------------------------- Frame -----------------------------------

Frame Frame::displaced(const QcnParams& p) {
  Frame f;
  f.mu_a = -std::sqrt(p.kappa_ex[0]) * p.alpha / cplx(0.5 * p.kappa_a(), p.delta1);
  f.mu_b = -std::sqrt(p.kappa_ex[2]) * p.beta / cplx(0.5 * p.kappa_b(), p.delta2);
  return f;
}

cplx Frame::shift(Subsystem s) const noexcept {
  if (s == Subsystem::cav_a) return mu_a;
  if (s == Subsystem::cav_b) return mu_b;
  return {};
}

QuantumOperator lab_field(const LayoutPtr& layout, Subsystem s, const Frame& frame) {
  QuantumOperator a = destroy(layout, s);
  const cplx mu = frame.shift(s);
  if (mu != cplx{}) a += mu * identity(layout);
  return a;
}

QuantumOperator lab_number(const LayoutPtr& layout, Subsystem s, const Frame& frame) {
  const QuantumOperator a = lab_field(layout, s, frame);
  return a.adjoint() * a;
}

// -------------------------------- builders ----------------------------------

bool GeneratorBundle::time_independent() const {
  if (h_schedule || !network.empty()) return false;
  for (const auto& term : lindblad) {
    if (term.time_dependent()) return false;
  }
  return true;
}

QuantumOperator build_h_qcn(const QcnParams& p, const LayoutPtr& layout, const Frame& frame) {
  require(layout, Subsystem::qe, "build_h_qcn");
  require(layout, Subsystem::cav_a, "build_h_qcn");
  require(layout, Subsystem::cav_b, "build_h_qcn");

  const QuantumOperator a = lab_field(layout, Subsystem::cav_a, frame);
  const QuantumOperator b = lab_field(layout, Subsystem::cav_b, frame);
  const QuantumOperator ad = a.adjoint();
  const QuantumOperator bd = b.adjoint();
  const QuantumOperator s12 = transition(layout, 1, 2);
  const QuantumOperator s13 = transition(layout, 1, 3);
  const QuantumOperator s21 = transition(layout, 2, 1);
  const QuantumOperator s31 = transition(layout, 3, 1);

  QuantumOperator h = cplx(p.delta1) * (ad * a);
  h += cplx(p.delta2) * (bd * b);
  h += cplx(p.delta3()) * transition(layout, 2, 2);
  h += cplx(p.delta4()) * transition(layout, 3, 3);
  h += cplx(p.g1) * (s21 * a + ad * s12);
  h += cplx(p.g2) * (s31 * b + bd * s13);
  return h;
}

QuantumOperator build_h_drive(const QcnParams& p, const LayoutPtr& layout, const Frame& frame) {
  require(layout, Subsystem::cav_a, "build_h_drive");
  require(layout, Subsystem::cav_b, "build_h_drive");
  const QuantumOperator a = lab_field(layout, Subsystem::cav_a, frame);
  const QuantumOperator b = lab_field(layout, Subsystem::cav_b, frame);

  QuantumOperator h = kI * std::sqrt(p.kappa_ex[0]) * (std::conj(p.alpha) * a - p.alpha * a.adjoint());
  h += kI * std::sqrt(p.kappa_ex[2]) * (std::conj(p.beta) * b - p.beta * b.adjoint());
  return h;
}

std::vector<LindbladTerm> collapse_terms(const QcnParams& p, const LayoutPtr& layout) {
  require(layout, Subsystem::qe, "collapse_terms");
  std::vector<LindbladTerm> terms;
  terms.push_back({p.kappa_a(), destroy(layout, Subsystem::cav_a), {}, "kappa_a"});
  terms.push_back({p.kappa_b(), destroy(layout, Subsystem::cav_b), {}, "kappa_b"});
  terms.push_back({p.gamma21, transition(layout, 1, 2), {}, "gamma21"});
  terms.push_back({p.gamma31, transition(layout, 1, 3), {}, "gamma31"});
  return terms;
}

GeneratorBundle build_system(const QcnParams& p, const LayoutPtr& layout, const Frame& frame) {
  validate(p);
  QuantumOperator h = build_h_qcn(p, layout, frame) + build_h_drive(p, layout, frame);

  // κ D[ã + μ] = κ D[ã] − i[(iκ/2)(μ*ã − μã†), ·]
  for (auto [s, kappa] : {std::pair{Subsystem::cav_a, p.kappa_a()},
                          std::pair{Subsystem::cav_b, p.kappa_b()}}) {
    const cplx mu = frame.shift(s);
    if (mu == cplx{}) continue;
    const QuantumOperator c = destroy(layout, s);
    h += (0.5 * kappa * kI) * (std::conj(mu) * c - mu * c.adjoint());
  }
  return GeneratorBundle{std::move(h), {}, collapse_terms(p, layout), {}};
}

// -------------------------------- cascade -----------------------------------

std::string to_string(ProbeMode mode) {
  return mode == ProbeMode::classical_drive ? "classical_drive" : "cascaded_source";
}

ProbeMode probe_mode_from_string(const std::string& name) {
  if (name == "classical_drive") return ProbeMode::classical_drive;
  if (name == "cascaded_source") return ProbeMode::cascaded_source;
  fail(ErrorCategory::config, "unknown probe mode '" + name + "'");
}

namespace {

void check_cascade_layout(const CascadeSpec& spec, const LayoutPtr& layout) {
  require(layout, Subsystem::src_d1, "build_cascaded");
  const bool has_d2 = layout->contains(Subsystem::src_d2);
  if (spec.probe_mode == ProbeMode::cascaded_source && !has_d2) {
    fail(ErrorCategory::invalid_argument, "build_cascaded: cascaded probe needs src_d2");
  }
  if (spec.probe_mode == ProbeMode::classical_drive && has_d2) {
    fail(ErrorCategory::invalid_argument, "build_cascaded: classical probe must not list src_d2");
  }
  if (spec.n_s < 0) fail(ErrorCategory::invalid_argument, "build_cascaded: n_s must be >= 0");
  if (spec.n_s >= layout->dim(Subsystem::src_d1)) {
    fail(ErrorCategory::invalid_argument, "build_cascaded: src_d1 truncation below n_s");
  }
}

}  // namespace

std::vector<LindbladTerm> collapse_terms(const QcnParams& p, const CascadeSpec& spec,
                                         const PulseSchedule& schedule, const LayoutPtr& layout) {
  check_cascade_layout(spec, layout);
  std::vector<LindbladTerm> terms;
  // Source decay is entirely through its output port (no intrinsic loss).
  terms.push_back({schedule.coupling_max(), destroy(layout, Subsystem::src_d1),
                   [schedule](double t) { return schedule.coupling(t); }, "kappa_d1"});
  if (spec.probe_mode == ProbeMode::cascaded_source) {
    terms.push_back({spec.kappa_d2, destroy(layout, Subsystem::src_d2), {}, "kappa_d2"});
  }
  for (auto& t : collapse_terms(p, layout)) terms.push_back(std::move(t));
  return terms;
}

GeneratorBundle build_cascaded(const QcnParams& p, const CascadeSpec& spec,
                               const PulseSchedule& schedule, const LayoutPtr& layout) {
  validate(p);
  check_cascade_layout(spec, layout);

  // The signal enters through the source network only.
  QcnParams drive = p;
  drive.alpha = 0.0;
  if (spec.probe_mode == ProbeMode::cascaded_source) drive.beta = 0.0;

  QuantumOperator h = build_h_qcn(p, layout) + build_h_drive(drive, layout);

  std::vector<NetworkTerm> network;
  const double k1 = p.kappa_ex[0];
  network.push_back({[schedule, k1](double t) { return std::sqrt(schedule.coupling(t) * k1); },
                     destroy(layout, Subsystem::src_d1), destroy(layout, Subsystem::cav_a),
                     "net_a"});

  if (spec.probe_mode == ProbeMode::cascaded_source) {
    if (!(spec.kappa_d2 > 0.0)) fail(ErrorCategory::domain, "build_cascaded: kappa_d2 must be > 0");
    // H_d2 = i(ε*d2 − εd2†) with ε = −β√κ_d2/2 leaves d2 in a coherent state
    // whose output amplitude √κ_d2⟨d2⟩ equals β.
    const QuantumOperator d2 = destroy(layout, Subsystem::src_d2);
    const cplx eps = -p.beta * std::sqrt(spec.kappa_d2) / 2.0;
    h += kI * (std::conj(eps) * d2 - eps * d2.adjoint());
    const double c = std::sqrt(spec.kappa_d2 * p.kappa_ex[2]);
    network.push_back({[c](double) { return c; }, d2, destroy(layout, Subsystem::cav_b), "net_b"});
  }

  return GeneratorBundle{std::move(h), {}, collapse_terms(p, spec, schedule, layout),
                         std::move(network)};
}

DensityMatrix cascaded_initial_state(const CascadeSpec& spec, const LayoutPtr& layout) {
  check_cascade_layout(spec, layout);
  return DensityMatrix::basis_state(layout, {{Subsystem::src_d1, spec.n_s}});
}

}  // namespace qcn
