#include "qcn/dynamics.hpp"
#include "qcn/error.hpp"
#include "qcn/model.hpp"

#include <gtest/gtest.h>

#include <random>

namespace qcn {
namespace {

const double kTwoPi = 2.0 * 3.14159265358979323846;

LayoutPtr qab(int na, int nb) {
  return make_layout({{Subsystem::qe, 3}, {Subsystem::cav_a, na}, {Subsystem::cav_b, nb}});
}

LayoutPtr cascade_layout(int nd1, int na, int nb) {
  return make_layout({{Subsystem::qe, 3},
                      {Subsystem::src_d1, nd1},
                      {Subsystem::cav_a, na},
                      {Subsystem::cav_b, nb}});
}

DensityMatrix random_state(const LayoutPtr& l, std::mt19937& rng) {
  std::normal_distribution<double> d;
  const auto n = static_cast<Eigen::Index>(l->total_dim());
  DenseMat g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = cplx(d(rng), d(rng));
  DenseMat rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(l, rho);
}

QcnParams random_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QcnParams p;
  p.g1 = u(rng);
  p.g2 = u(rng);
  for (auto& k : p.kappa_ex) k = 0.1 + u(rng);
  p.kappa_in_a = 0.1 * u(rng);
  p.kappa_in_b = 0.1 * u(rng);
  p.gamma21 = 0.05 * u(rng);
  p.gamma31 = 0.05 * u(rng);
  p.delta1 = u(rng) - 0.5;
  p.delta2 = u(rng) - 0.5;
  p.delta_a = u(rng) - 0.5;
  p.delta_b = u(rng) - 0.5;
  p.alpha = cplx(u(rng) - 0.5, u(rng) - 0.5);
  p.beta = cplx(u(rng) - 0.5, u(rng) - 0.5);
  return p;
}

TEST(Params, DerivedQuantities) {
  QcnParams p;
  p.kappa_ex = {0.3, 0.2, 0.4, 0.1};
  p.kappa_in_a = 0.05;
  p.kappa_in_b = 0.07;
  p.delta1 = 0.2;
  p.delta_a = -0.5;
  p.delta2 = 0.1;
  p.delta_b = 0.3;
  EXPECT_DOUBLE_EQ(p.kappa_a(), 0.55);
  EXPECT_DOUBLE_EQ(p.kappa_b(), 0.57);
  EXPECT_DOUBLE_EQ(p.delta3(), -0.3);
  EXPECT_DOUBLE_EQ(p.delta4(), 0.4);
}

TEST(Params, Validation) {
  EXPECT_TRUE(validate(QcnParams::fig2(1e-2, 0.0)).empty());
  QcnParams p = QcnParams::fig2();
  p.gamma21 = p.kappa_a();
  EXPECT_FALSE(validate(p).empty());
  p = QcnParams::fig2();
  p.kappa_ex[1] = -0.1;
  EXPECT_THROW(validate(p), Error);
  p = QcnParams::fig2();
  p.alpha = cplx(std::nan(""), 0.0);
  EXPECT_THROW(validate(p), Error);
  p = QcnParams::fig2();
  p.kappa_ex = {0.0, 0.0, 0.5, 0.5};
  EXPECT_THROW(validate(p), Error);
}

TEST(Hamiltonian, ZeroCases) {
  auto l = qab(3, 3);
  QcnParams p = QcnParams::fig2();
  p.g1 = p.g2 = 0.0;
  EXPECT_EQ(build_h_qcn(p, l).matrix().norm(), 0.0);
  EXPECT_EQ(build_h_drive(QcnParams::fig2(0.0, 0.0), l).matrix().norm(), 0.0);
}

TEST(Hamiltonian, CouplingElement) {
  auto l = qab(4, 3);
  const auto h = build_h_qcn(QcnParams::fig2(), l);
  for (int na = 0; na + 1 < 4; ++na) {
    for (int nb = 0; nb < 3; ++nb) {
      const auto r = l->basis_index({{Subsystem::qe, 0}, {Subsystem::cav_a, na + 1}, {Subsystem::cav_b, nb}});
      const auto c = l->basis_index({{Subsystem::qe, 1}, {Subsystem::cav_a, na}, {Subsystem::cav_b, nb}});
      EXPECT_NEAR(std::abs(h.coeff(r, c) - cplx(0.1 * std::sqrt(na + 1.0), 0.0)), 0.0, 1e-15);
      EXPECT_NEAR(std::abs(h.coeff(c, r) - cplx(0.1 * std::sqrt(na + 1.0), 0.0)), 0.0, 1e-15);
    }
  }
}

TEST(Hamiltonian, DriveElement) {
  auto l = qab(3, 3);
  QcnParams p = QcnParams::fig2(0.04, 0.0);
  const auto h = build_h_drive(p, l);
  const auto vac = l->basis_index({});
  const auto one = l->basis_index({{Subsystem::cav_a, 1}});
  EXPECT_NEAR(std::abs(h.coeff(vac, one) - cplx(0.0, std::sqrt(0.5) * 0.2)), 0.0, 1e-15);
}

TEST(Hamiltonian, HermitianForRandomParams) {
  std::mt19937 rng(3);
  auto l = qab(3, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const QcnParams p = random_params(rng);
    EXPECT_LT(build_h_qcn(p, l).hermiticity_error(), 1e-12);
    EXPECT_LT(build_h_drive(p, l).hermiticity_error(), 1e-12);
    EXPECT_LT(build_system(p, l, Frame::displaced(p)).h_static.hermiticity_error(), 1e-12);
  }
}

TEST(Hamiltonian, MissingSubsystem) {
  auto l = make_layout({{Subsystem::qe, 3}, {Subsystem::cav_a, 3}});
  EXPECT_THROW(build_h_qcn(QcnParams::fig2(), l), Error);
  EXPECT_THROW(build_h_drive(QcnParams::fig2(), l), Error);
}

TEST(Collapse, FourTermsWithFig2Rates) {
  auto terms = collapse_terms(QcnParams::fig2(), qab(2, 2));
  ASSERT_EQ(terms.size(), 4u);
  const double expected[] = {1.0, 1.0, 0.01, 0.01};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(terms[i].rate, expected[i]);
}

TEST(Collapse, SixTermsWhenCascaded) {
  const CascadeSpec spec{};
  const auto sched = pulse_coupling_schedule(spec.pulse, spec.kappa_d1_ex2_max, {0.0, kTwoPi * 250});
  auto terms = collapse_terms(QcnParams::fig4(), spec, sched, cascade_layout(2, 2, 2));
  EXPECT_EQ(terms.size(), 5u);  // classical probe: no d2
  CascadeSpec cs = spec;
  cs.probe_mode = ProbeMode::cascaded_source;
  auto l5 = make_layout({{Subsystem::qe, 3},
                         {Subsystem::src_d1, 2},
                         {Subsystem::cav_a, 2},
                         {Subsystem::cav_b, 2},
                         {Subsystem::src_d2, 2}});
  terms = collapse_terms(QcnParams::fig4(), cs, sched, l5);
  ASSERT_EQ(terms.size(), 6u);
  bool has_d1 = false;
  for (const auto& t : terms) has_d1 = has_d1 || t.time_dependent();
  EXPECT_TRUE(has_d1);
}

TEST(Cascade, LayoutMismatchWithProbeMode) {
  const CascadeSpec spec{};
  const auto sched = pulse_coupling_schedule(spec.pulse, spec.kappa_d1_ex2_max, {0.0, kTwoPi * 250});
  CascadeSpec cs = spec;
  cs.probe_mode = ProbeMode::cascaded_source;
  EXPECT_THROW(build_cascaded(QcnParams::fig4(), cs, sched, cascade_layout(2, 2, 2)), Error);
  EXPECT_THROW(build_cascaded(QcnParams::fig4(), spec, sched, qab(2, 2)), Error);
}

TEST(Generator, TracePreservingIncludingNetwork) {
  std::mt19937 rng(11);
  const CascadeSpec spec{};
  const auto sched = pulse_coupling_schedule(spec.pulse, spec.kappa_d1_ex2_max, {0.0, kTwoPi * 250});
  auto l = cascade_layout(2, 2, 3);
  const auto bundle = build_cascaded(random_params(rng), spec, sched, l);
  ASSERT_FALSE(bundle.network.empty());
  for (double t : {0.0, spec.pulse.delay - 10.0, spec.pulse.delay, spec.pulse.delay + 25.0}) {
    const auto rho = random_state(l, rng);
    EXPECT_LT(std::abs(lindblad_rhs(rho, bundle, t).trace()), 1e-10) << "t=" << t;
  }
  auto ls = qab(3, 3);
  const auto sys = build_system(random_params(rng), ls);
  EXPECT_LT(std::abs(lindblad_rhs(random_state(ls, rng), sys, 0.0).trace()), 1e-10);
}

// Relabeling a<->b (and emitter levels 2<->3) maps the generator of the
// swapped parameters onto the original one.
TEST(Generator, ExchangeSymmetry) {
  std::mt19937 rng(5);
  const int n = 3;
  auto l = qab(n, n);
  const auto dim = static_cast<Eigen::Index>(l->total_dim());
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(dim);
  const int qmap[] = {0, 2, 1};
  for (int q = 0; q < 3; ++q)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const auto from = l->basis_index({{Subsystem::qe, q}, {Subsystem::cav_a, a}, {Subsystem::cav_b, b}});
        const auto to = l->basis_index({{Subsystem::qe, qmap[q]}, {Subsystem::cav_a, b}, {Subsystem::cav_b, a}});
        perm.indices()[static_cast<Eigen::Index>(from)] = static_cast<int>(to);
      }
  const QcnParams p = random_params(rng);
  const auto g = build_system(p, l);
  const auto gs = build_system(p.swapped(), l);
  const auto rho = random_state(l, rng);
  const DenseMat lhs = perm * lindblad_rhs(rho, g, 0.0) * perm.transpose();
  const DensityMatrix rho_p(l, perm * rho.matrix() * perm.transpose());
  const DenseMat rhs = lindblad_rhs(rho_p, gs, 0.0);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Frame, DisplacedGeneratorMatchesLabObservables) {
  QcnParams p = QcnParams::fig2(0.05, 0.02);
  auto l = qab(6, 6);
  const auto lab = steady_state(build_system(p, l));
  const Frame f = Frame::displaced(p);
  const auto disp = steady_state(build_system(p, l, f));
  const auto ol = steady_observables(lab, p);
  const auto od = steady_observables(disp, p, f);
  EXPECT_NEAR(*ol.T_a, *od.T_a, 1e-4);
  EXPECT_NEAR(ol.sigma22, od.sigma22, 1e-4);
  EXPECT_NEAR(ol.n_b, od.n_b, 1e-5);
}

TEST(Cascade, InitialStateHoldsSignal) {
  CascadeSpec spec;
  spec.n_s = 2;
  auto l = cascade_layout(3, 3, 2);
  const auto rho = cascaded_initial_state(spec, l);
  EXPECT_NEAR(expect_real(number(l, Subsystem::src_d1), rho), 2.0, 1e-14);
  EXPECT_NEAR(expect_real(number(l, Subsystem::cav_a), rho), 0.0, 1e-14);
  EXPECT_NEAR(expect_real(transition(l, 1, 1), rho), 1.0, 1e-14);
  spec.n_s = 3;
  const auto sched = pulse_coupling_schedule(spec.pulse, spec.kappa_d1_ex2_max, {0.0, kTwoPi * 250});
  EXPECT_THROW(build_cascaded(QcnParams::fig4(), spec, sched, l), Error);
}

}  // namespace
}  // namespace qcn
