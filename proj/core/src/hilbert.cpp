#include "qcn/hilbert.hpp"

#include "qcn/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qcn {

std::string_view to_string(Subsystem s) noexcept {
  switch (s) {
    case Subsystem::qe: return "qe";
    case Subsystem::cav_a: return "cav_a";
    case Subsystem::cav_b: return "cav_b";
    case Subsystem::src_d1: return "src_d1";
    case Subsystem::src_d2: return "src_d2";
  }
  return "?";
}

Subsystem subsystem_from_string(std::string_view name) {
  for (auto s : {Subsystem::qe, Subsystem::cav_a, Subsystem::cav_b, Subsystem::src_d1,
                 Subsystem::src_d2}) {
    if (to_string(s) == name) return s;
  }
  fail(ErrorCategory::invalid_argument, "unknown subsystem label '" + std::string(name) + "'");
}

// ------------------------------- SpaceLayout --------------------------------

SpaceLayout::SpaceLayout(std::vector<SubsystemSpec> specs) : subsystems_(std::move(specs)) {
  for (const auto& s : subsystems_) total_dim_ *= static_cast<std::size_t>(s.dim);
}

LayoutPtr make_layout(std::vector<SubsystemSpec> specs) {
  if (specs.empty()) fail(ErrorCategory::invalid_argument, "make_layout: empty subsystem list");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (s.dim < 1) {
      fail(ErrorCategory::invalid_argument,
           "make_layout: nonpositive dimension for " + std::string(to_string(s.label)));
    }
    if (s.label == Subsystem::qe && s.dim != kEmitterDim) {
      fail(ErrorCategory::invalid_argument, "make_layout: qe must have dimension 3");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (specs[j].label == s.label) {
        fail(ErrorCategory::invalid_argument,
             "make_layout: duplicate label " + std::string(to_string(s.label)));
      }
    }
  }
  auto layout = LayoutPtr(new SpaceLayout(std::move(specs)));
  if (layout->total_dim() < 3) {
    fail(ErrorCategory::invalid_argument, "make_layout: total dimension must be at least 3");
  }
  return layout;
}

bool SpaceLayout::contains(Subsystem s) const noexcept {
  return std::any_of(subsystems_.begin(), subsystems_.end(),
                     [s](const SubsystemSpec& spec) { return spec.label == s; });
}

std::size_t SpaceLayout::position(Subsystem s) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].label == s) return i;
  }
  fail(ErrorCategory::invalid_argument,
       "layout has no subsystem " + std::string(to_string(s)) + " (" + describe() + ")");
}

int SpaceLayout::dim(Subsystem s) const { return subsystems_[position(s)].dim; }

std::size_t SpaceLayout::stride(Subsystem s) const {
  std::size_t stride = 1;
  for (std::size_t i = position(s) + 1; i < subsystems_.size(); ++i) {
    stride *= static_cast<std::size_t>(subsystems_[i].dim);
  }
  return stride;
}

std::size_t SpaceLayout::basis_index(const std::map<Subsystem, int>& levels) const {
  for (const auto& [label, level] : levels) {
    if (level < 0 || level >= dim(label)) {
      fail(ErrorCategory::invalid_argument,
           "basis_index: level out of range for " + std::string(to_string(label)));
    }
  }
  std::size_t index = 0;
  for (const auto& s : subsystems_) {
    auto it = levels.find(s.label);
    index = index * static_cast<std::size_t>(s.dim) +
            static_cast<std::size_t>(it == levels.end() ? 0 : it->second);
  }
  return index;
}

bool SpaceLayout::operator==(const SpaceLayout& other) const noexcept {
  if (subsystems_.size() != other.subsystems_.size()) return false;
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].label != other.subsystems_[i].label ||
        subsystems_[i].dim != other.subsystems_[i].dim) {
      return false;
    }
  }
  return true;
}

std::string SpaceLayout::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (i) os << " x ";
    os << to_string(subsystems_[i].label) << ':' << subsystems_[i].dim;
  }
  return os.str();
}

void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, std::string_view context) {
  if (&a == &b || a == b) return;
  fail(ErrorCategory::layout_mismatch,
       std::string(context) + ": layout mismatch (" + a.describe() + " vs " + b.describe() + ")");
}

// ----------------------------- QuantumOperator ------------------------------

QuantumOperator::QuantumOperator(LayoutPtr layout, SparseMat matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(layout_->total_dim());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    fail(ErrorCategory::layout_mismatch, "QuantumOperator: matrix dimension does not match layout");
  }
  matrix_.makeCompressed();
}

cplx QuantumOperator::coeff(std::size_t row, std::size_t col) const {
  return matrix_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
}

QuantumOperator QuantumOperator::adjoint() const {
  return QuantumOperator(layout_, SparseMat(matrix_.adjoint()));
}

bool QuantumOperator::shares_layout(const QuantumOperator& other) const noexcept {
  return layout_ == other.layout_ || *layout_ == *other.layout_;
}

double QuantumOperator::hermiticity_error() const {
  SparseMat diff = matrix_ - SparseMat(matrix_.adjoint());
  double err = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(diff, k); it; ++it) err = std::max(err, std::abs(it.value()));
  }
  return err;
}

QuantumOperator& QuantumOperator::operator+=(const QuantumOperator& rhs) {
  require_same_layout(*layout_, *rhs.layout_, "operator+");
  matrix_ += rhs.matrix_;
  return *this;
}

QuantumOperator& QuantumOperator::operator-=(const QuantumOperator& rhs) {
  require_same_layout(*layout_, *rhs.layout_, "operator-");
  matrix_ -= rhs.matrix_;
  return *this;
}

QuantumOperator& QuantumOperator::operator*=(cplx s) {
  matrix_ *= s;
  return *this;
}

QuantumOperator operator*(const QuantumOperator& lhs, const QuantumOperator& rhs) {
  require_same_layout(lhs.layout(), rhs.layout(), "operator*");
  return QuantumOperator(lhs.layout_ptr(), SparseMat(lhs.matrix() * rhs.matrix()));
}

QuantumOperator commutator(const QuantumOperator& a, const QuantumOperator& b) {
  return a * b - b * a;
}

QuantumOperator identity(const LayoutPtr& layout) {
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  SparseMat m(n, n);
  m.setIdentity();
  return QuantumOperator(layout, std::move(m));
}

QuantumOperator zero_operator(const LayoutPtr& layout) {
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  return QuantumOperator(layout, SparseMat(n, n));
}

QuantumOperator embed(const LayoutPtr& layout, Subsystem s, const DenseMat& local) {
  const auto d = static_cast<std::size_t>(layout->dim(s));
  if (static_cast<std::size_t>(local.rows()) != d || static_cast<std::size_t>(local.cols()) != d) {
    fail(ErrorCategory::layout_mismatch,
         "embed: local matrix size does not match " + std::string(to_string(s)));
  }
  const std::size_t right = layout->stride(s);
  const std::size_t left = layout->total_dim() / (d * right);

  std::vector<Eigen::Triplet<cplx>> triplets;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const cplx v = local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v == cplx{}) continue;
      for (std::size_t l = 0; l < left; ++l) {
        for (std::size_t r = 0; r < right; ++r) {
          const auto row = static_cast<Eigen::Index>((l * d + i) * right + r);
          const auto col = static_cast<Eigen::Index>((l * d + j) * right + r);
          triplets.emplace_back(row, col, v);
        }
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  SparseMat m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return QuantumOperator(layout, std::move(m));
}

DenseMat local_destroy(int dim) {
  DenseMat a = DenseMat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

namespace {

void require_bosonic(const LayoutPtr& layout, Subsystem s, std::string_view context) {
  if (s == Subsystem::qe) {
    fail(ErrorCategory::invalid_argument, std::string(context) + ": qe is not a bosonic mode");
  }
  if (!layout->contains(s)) {
    fail(ErrorCategory::invalid_argument,
         std::string(context) + ": layout has no subsystem " + std::string(to_string(s)));
  }
}

}  // namespace

QuantumOperator destroy(const LayoutPtr& layout, Subsystem s) {
  require_bosonic(layout, s, "destroy");
  return embed(layout, s, local_destroy(layout->dim(s)));
}

QuantumOperator create(const LayoutPtr& layout, Subsystem s) {
  require_bosonic(layout, s, "create");
  return embed(layout, s, local_destroy(layout->dim(s)).adjoint());
}

QuantumOperator number(const LayoutPtr& layout, Subsystem s) {
  require_bosonic(layout, s, "number");
  const DenseMat a = local_destroy(layout->dim(s));
  return embed(layout, s, a.adjoint() * a);
}

QuantumOperator transition(const LayoutPtr& layout, int m, int n) {
  if (m < 1 || m > 3 || n < 1 || n > 3) {
    fail(ErrorCategory::invalid_argument, "transition: level indices must be in {1,2,3}");
  }
  if (!layout->contains(Subsystem::qe)) {
    fail(ErrorCategory::invalid_argument, "transition: layout has no emitter");
  }
  DenseMat local = DenseMat::Zero(kEmitterDim, kEmitterDim);
  local(m - 1, n - 1) = 1.0;
  return embed(layout, Subsystem::qe, local);
}

// ------------------------------ DensityMatrix -------------------------------

DensityMatrix::DensityMatrix(LayoutPtr layout, DenseMat matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(layout_->total_dim());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    fail(ErrorCategory::layout_mismatch, "DensityMatrix: matrix dimension does not match layout");
  }
}

DensityMatrix DensityMatrix::basis_state(const LayoutPtr& layout,
                                         const std::map<Subsystem, int>& levels) {
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  DenseMat m = DenseMat::Zero(n, n);
  const auto k = static_cast<Eigen::Index>(layout->basis_index(levels));
  m(k, k) = 1.0;
  return DensityMatrix(layout, std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(const LayoutPtr& layout) {
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  DenseMat m = DenseMat::Identity(n, n) / static_cast<double>(n);
  return DensityMatrix(layout, std::move(m));
}

double DensityMatrix::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const DenseMat h = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMat> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityMatrix::hermitize() {
  DenseMat h = 0.5 * (matrix_ + matrix_.adjoint());
  matrix_ = std::move(h);
}

void DensityMatrix::normalize() {
  const cplx tr = matrix_.trace();
  if (std::abs(tr) == 0.0) fail(ErrorCategory::domain, "DensityMatrix::normalize: zero trace");
  matrix_ /= tr.real();
}

DensityCheck check_density(const DensityMatrix& rho, double herm_tol, double trace_tol,
                           double eig_tol) {
  DensityCheck c;
  c.hermiticity_error = rho.hermiticity_error();
  c.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
  c.min_eigenvalue = rho.min_eigenvalue();
  c.ok = c.hermiticity_error <= herm_tol && c.trace_error <= trace_tol &&
         c.min_eigenvalue >= -eig_tol;
  return c;
}

cplx expect(const SparseMat& op, const DenseMat& rho) {
  // tr(Aρ) = Σ_ij A_ij ρ_ji, visiting only the nonzeros of A.
  cplx acc{};
  for (Eigen::Index k = 0; k < op.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(op, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
  }
  return acc;
}

cplx expect(const QuantumOperator& op, const DensityMatrix& rho) {
  require_same_layout(op.layout(), rho.layout(), "expect");
  return expect(op.matrix(), rho.matrix());
}

double expect_real(const QuantumOperator& op, const DensityMatrix& rho, double imag_tol) {
  const cplx v = expect(op, rho);
  if (std::abs(v.imag()) > imag_tol) {
    fail(ErrorCategory::domain, "expect_real: imaginary part " + std::to_string(v.imag()) +
                                    " exceeds tolerance for a hermitian observable");
  }
  return v.real();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_layout(rho.layout(), sigma.layout(), "trace_distance");
  DenseMat diff = rho.matrix() - sigma.matrix();
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMat> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace qcn
