// hilbert.hpp: tensor-product layout of emitter and cavity factors, sparse
// operators embedded in that space, and dense density matrices.
//
// Basis ordering is row-major over subsystems in layout order: the first listed
// subsystem is the slowest-varying index. With qe listed first the emitter index
// is the outermost block, which keeps element positions stable across runs and
// golden files.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qcn {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx>;
using DenseMat = Eigen::MatrixXcd;

/// Factor labels. qe is the three-level emitter, the rest are bosonic modes.
enum class Subsystem { qe, cav_a, cav_b, src_d1, src_d2 };

std::string_view to_string(Subsystem s) noexcept;
Subsystem subsystem_from_string(std::string_view name);

inline constexpr int kEmitterDim = 3;

struct SubsystemSpec {
  Subsystem label;
  int dim;
};

class SpaceLayout;
using LayoutPtr = std::shared_ptr<const SpaceLayout>;

class SpaceLayout {
 public:
  const std::vector<SubsystemSpec>& subsystems() const noexcept { return subsystems_; }
  std::size_t total_dim() const noexcept { return total_dim_; }

  bool contains(Subsystem s) const noexcept;
  /// Position of the factor in layout order; throws if absent.
  std::size_t position(Subsystem s) const;
  int dim(Subsystem s) const;

  /// Product of the dimensions of the factors listed after `s`.
  std::size_t stride(Subsystem s) const;

  /// Flat basis index for a product state. Unlisted factors sit in level 0.
  /// For qe the level is the zero-based index (|1⟩ -> 0).
  std::size_t basis_index(const std::map<Subsystem, int>& levels) const;

  bool operator==(const SpaceLayout& other) const noexcept;

  std::string describe() const;

 private:
  friend LayoutPtr make_layout(std::vector<SubsystemSpec> specs);
  explicit SpaceLayout(std::vector<SubsystemSpec> specs);

  std::vector<SubsystemSpec> subsystems_;
  std::size_t total_dim_{1};
};

/// Validates labels/dimensions and freezes the ordering as given.
LayoutPtr make_layout(std::vector<SubsystemSpec> specs);

/// Complex operator on the full tensor space of a layout.
class QuantumOperator {
 public:
  QuantumOperator(LayoutPtr layout, SparseMat matrix);

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const SparseMat& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return layout_->total_dim(); }

  cplx coeff(std::size_t row, std::size_t col) const;
  DenseMat dense() const { return DenseMat(matrix_); }

  QuantumOperator adjoint() const;
  bool shares_layout(const QuantumOperator& other) const noexcept;

  /// max_ij |A_ij - (A†)_ij|
  double hermiticity_error() const;

  QuantumOperator& operator+=(const QuantumOperator& rhs);
  QuantumOperator& operator-=(const QuantumOperator& rhs);
  QuantumOperator& operator*=(cplx s);

  friend QuantumOperator operator+(QuantumOperator lhs, const QuantumOperator& rhs) { return lhs += rhs; }
  friend QuantumOperator operator-(QuantumOperator lhs, const QuantumOperator& rhs) { return lhs -= rhs; }
  friend QuantumOperator operator*(QuantumOperator op, cplx s) { return op *= s; }
  friend QuantumOperator operator*(cplx s, QuantumOperator op) { return op *= s; }
  friend QuantumOperator operator*(const QuantumOperator& lhs, const QuantumOperator& rhs);

 private:
  LayoutPtr layout_;
  SparseMat matrix_;
};

QuantumOperator commutator(const QuantumOperator& a, const QuantumOperator& b);

/// Throws ErrorCategory::layout_mismatch when the layouts differ.
void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, std::string_view context);

QuantumOperator identity(const LayoutPtr& layout);
QuantumOperator zero_operator(const LayoutPtr& layout);

/// Embeds a local matrix acting on factor `s`, identity elsewhere.
QuantumOperator embed(const LayoutPtr& layout, Subsystem s, const DenseMat& local);

/// Local annihilation operator, <n-1|a|n> = sqrt(n), on a bosonic factor.
DenseMat local_destroy(int dim);

QuantumOperator destroy(const LayoutPtr& layout, Subsystem s);
QuantumOperator create(const LayoutPtr& layout, Subsystem s);
QuantumOperator number(const LayoutPtr& layout, Subsystem s);

/// |m⟩⟨n| on the emitter with m, n in {1, 2, 3}.
QuantumOperator transition(const LayoutPtr& layout, int m, int n);

/// Density matrix with dense storage; dissipation fills it in generically.
class DensityMatrix {
 public:
  DensityMatrix(LayoutPtr layout, DenseMat matrix);

  /// |ψ⟩⟨ψ| for a product basis state.
  static DensityMatrix basis_state(const LayoutPtr& layout, const std::map<Subsystem, int>& levels);
  static DensityMatrix maximally_mixed(const LayoutPtr& layout);

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const DenseMat& matrix() const noexcept { return matrix_; }
  DenseMat& matrix() noexcept { return matrix_; }

  cplx trace() const { return matrix_.trace(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;

  /// ρ <- (ρ + ρ†)/2
  void hermitize();
  /// ρ <- ρ / tr ρ
  void normalize();

 private:
  LayoutPtr layout_;
  DenseMat matrix_;
};

struct DensityCheck {
  double hermiticity_error{0.0};
  double trace_error{0.0};
  double min_eigenvalue{0.0};
  bool ok{false};
};

/// Checks hermiticity (1e-10), unit trace (1e-8) and positivity (-1e-8).
DensityCheck check_density(const DensityMatrix& rho, double herm_tol = 1e-10,
                           double trace_tol = 1e-8, double eig_tol = 1e-8);

/// tr(op ρ)
cplx expect(const QuantumOperator& op, const DensityMatrix& rho);
cplx expect(const SparseMat& op, const DenseMat& rho);

/// Real part of tr(op ρ). Throws ErrorCategory::domain when |Im| > imag_tol.
double expect_real(const QuantumOperator& op, const DensityMatrix& rho, double imag_tol = 1e-9);

/// ½ ||ρ - σ||_1
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace qcn
