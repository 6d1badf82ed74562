#pragma once

// Dense real linear-algebra kernel: symmetric eigendecomposition, truncated
// SVD, projectors and orthogonal alignment.
//
// Every decomposition returned from this header follows the same sign rule:
// in each column the entry of largest magnitude (first one on ties) is made
// nonnegative. Outputs are therefore deterministic for a fixed input.

#include <optional>

#include <Eigen/Dense>

namespace mpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Tolerance used when validating that columns are orthonormal.
inline constexpr double kOrthonormalTol = 1e-10;

/// A matrix with orthonormal columns under the deterministic sign rule.
class OrthonormalBasis {
 public:
  /// Validates orthonormality (max-norm of BᵀB − I within kOrthonormalTol) and
  /// applies the sign convention. Throws ContractError otherwise.
  static OrthonormalBasis from_columns(Matrix columns);

  /// Orthonormalizes arbitrary full-column-rank input through a thin QR
  /// factorization. Throws DegenerateError on rank deficiency.
  static OrthonormalBasis orthonormalize(const Matrix& columns);

  static OrthonormalBasis identity(Index n);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  Index rank() const noexcept { return m_.cols(); }

  /// First k columns as a basis of the leading k-dimensional subspace.
  OrthonormalBasis leading(Index k) const;

 private:
  explicit OrthonormalBasis(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

struct EigenDecomposition {
  OrthonormalBasis vectors;  // top-k eigenvectors, descending eigenvalue order
  Vector values;             // all n eigenvalues, nonincreasing
};

enum class Side { left, right, both };

struct SingularDecomposition {
  std::optional<OrthonormalBasis> left;
  std::optional<OrthonormalBasis> right;
  Vector values;  // all min(n, m) singular values, nonincreasing
};

/// In-place sign normalization of every column.
void apply_sign_convention(Matrix& m);

/// Largest |BᵀB − I| entry.
double orthonormality_error(const Matrix& b);

bool all_finite(const Matrix& m);

/// Leading k eigenvectors of a symmetric matrix (symmetrized as (M+Mᵀ)/2)
/// together with the full eigenvalue list.
EigenDecomposition top_eigvecs(const Matrix& m, Index k);

/// Leading k singular vectors on the requested side(s) and all singular values.
/// Computed from the Gram matrix of the smaller dimension; the other side is
/// recovered by back-multiplication, falling back to its own Gram matrix when
/// the k-th singular value is too small for that to be accurate.
SingularDecomposition top_singvecs(const Matrix& m, Index k, Side side);

/// Orthogonal projector B Bᵀ.
Matrix projector(const OrthonormalBasis& b);

/// Projector for a raw matrix; throws ContractError unless it is orthonormal.
Matrix projector(const Matrix& b);

/// Projector onto the column span of an arbitrary full-rank matrix.
Matrix span_projector(const Matrix& a);

/// k×k orthonormal H minimizing ‖B − A H‖_F, i.e. H = U Vᵀ from the SVD of AᵀB.
Matrix procrustes_align(const Matrix& a, const Matrix& b);

/// Largest singular value.
double op_norm(const Matrix& m);

/// Largest |entry|.
double max_abs(const Matrix& m);

}  // namespace mpca
