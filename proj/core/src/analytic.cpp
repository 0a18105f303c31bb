#include "qcn/analytic.hpp"

#include "qcn/error.hpp"

#include <cmath>

namespace qcn::analytic {

namespace {

bool close(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); }

}  // namespace

AnalyticInputs AnalyticInputs::from_params(const QcnParams& p) {
  validate(p);
  if (p.delta1 != 0.0 || p.delta2 != 0.0 || p.delta_a != 0.0 || p.delta_b != 0.0) {
    fail(ErrorCategory::domain, "analytic: closed forms hold at resonance only");
  }
  if (!close(p.kappa_ex[0], p.kappa_ex[1]) || !close(p.kappa_ex[2], p.kappa_ex[3])) {
    fail(ErrorCategory::domain, "analytic: closed forms assume symmetric mirrors per cavity");
  }
  return {p.g1, p.g2, p.kappa_a(), p.kappa_b(), p.gamma21, p.gamma31, std::norm(p.alpha),
          std::norm(p.beta)};
}

AnalyticInputs AnalyticInputs::swapped() const {
  return {g2, g1, kappa_b, kappa_a, gamma31, gamma21, beta2, alpha2};
}

double gamma_A(const AnalyticInputs& in) { return in.gamma21 + 4.0 * in.g1 * in.g1 / in.kappa_a; }

double gamma_B(const AnalyticInputs& in) { return in.gamma31 + 4.0 * in.g2 * in.g2 / in.kappa_b; }

double denominator(const AnalyticInputs& in) {
  if (!(in.kappa_a > 0.0) || !(in.kappa_b > 0.0)) {
    fail(ErrorCategory::domain, "analytic: cavity losses must be positive");
  }
  const double g1s = in.g1 * in.g1;
  const double g2s = in.g2 * in.g2;
  return gamma_A(in) * gamma_B(in) * in.kappa_a * in.kappa_b +
         16.0 * (g1s * in.kappa_b * in.alpha2 + g2s * in.kappa_a * in.beta2);
}

namespace {

double checked_denominator(const AnalyticInputs& in) {
  const double d = denominator(in);
  if (!(d > 0.0)) fail(ErrorCategory::domain, "analytic: degenerate denominator D = 0");
  return d;
}

}  // namespace

Pair transmissions(const AnalyticInputs& in) {
  const double d = checked_denominator(in);
  const double g1s = in.g1 * in.g1;
  const double g2s = in.g2 * in.g2;
  const double ta =
      1.0 - 8.0 * g1s * (in.kappa_b / in.kappa_a) * (in.gamma21 * in.kappa_a + 2.0 * g1s) / d;
  const double tb =
      1.0 - 8.0 * g2s * (in.kappa_a / in.kappa_b) * (in.gamma31 * in.kappa_b + 2.0 * g2s) / d;
  return {ta, tb};
}

Pair populations(const AnalyticInputs& in) {
  const double d = checked_denominator(in);
  return {8.0 * in.g1 * in.g1 * in.kappa_b * in.alpha2 / d,
          8.0 * in.g2 * in.g2 * in.kappa_a * in.beta2 / d};
}

Pair bare_cavity_photons(const QcnParams& p) {
  return {2.0 * std::norm(p.alpha) / p.kappa_a(), 2.0 * std::norm(p.beta) / p.kappa_b()};
}

}  // namespace qcn::analytic
