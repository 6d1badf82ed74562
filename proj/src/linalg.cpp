#include "mpca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpca/error.hpp"

namespace mpca {

namespace {

// Singular values below this fraction of σ₁ make back-multiplied singular
// vectors too inaccurate; the other side's Gram matrix is used instead.
constexpr double kBackMultiplyFloor = 1e-6;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Eigenvectors of a symmetric matrix, descending order, all of them.
void full_symmetric_eigen(const Matrix& sym, Vector& values, Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw DegenerateError("symmetric eigensolver failed to converge");
  }
  values = solver.eigenvalues().reverse();
  vectors = solver.eigenvectors().rowwise().reverse();
}

// Leading k eigenvectors of a Gram matrix, with clamped square-rooted values.
void gram_side(const Matrix& gram, Index k, Vector& sigma, Matrix& vectors) {
  Vector values;
  Matrix all;
  full_symmetric_eigen(gram, values, all);
  sigma = values.cwiseMax(0.0).cwiseSqrt();
  vectors = all.leftCols(k);
}

// Recovers the partner singular vectors as M v / σ, re-orthonormalized.
std::optional<Matrix> back_multiply(const Matrix& m, const Matrix& partner, const Vector& sigma,
                                    Index k) {
  if (k == 0) return Matrix(m.rows(), 0);
  const double top = sigma(0);
  if (!(top > 0.0) || sigma(k - 1) <= kBackMultiplyFloor * top) return std::nullopt;
  Matrix out = m * partner;
  for (Index j = 0; j < k; ++j) out.col(j) /= sigma(j);
  Eigen::HouseholderQR<Matrix> qr(out);
  Matrix q = qr.householderQ() * Matrix::Identity(out.rows(), k);
  // QR may flip column directions; keep each column aligned with the raw one.
  for (Index j = 0; j < k; ++j) {
    if (q.col(j).dot(out.col(j)) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace

void apply_sign_convention(Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (m.rows() > 0 && m(arg, j) < 0.0) m.col(j) *= -1.0;
  }
}

double orthonormality_error(const Matrix& b) {
  if (b.cols() == 0) return 0.0;
  const Matrix gram = b.transpose() * b;
  return (gram - Matrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

OrthonormalBasis OrthonormalBasis::from_columns(Matrix columns) {
  if (!columns.allFinite()) throw InputError("basis has non-finite entries");
  if (columns.cols() > columns.rows()) {
    throw DimensionError("basis has more columns than rows");
  }
  const double err = orthonormality_error(columns);
  if (err > kOrthonormalTol) {
    throw ContractError("columns are not orthonormal (max |BᵀB − I| = " + std::to_string(err) +
                        ")");
  }
  apply_sign_convention(columns);
  return OrthonormalBasis(std::move(columns));
}

OrthonormalBasis OrthonormalBasis::orthonormalize(const Matrix& columns) {
  if (!columns.allFinite()) throw InputError("basis has non-finite entries");
  const Index n = columns.rows();
  const Index k = columns.cols();
  if (k > n) throw DimensionError("cannot orthonormalize more columns than rows");
  Eigen::ColPivHouseholderQR<Matrix> qr(columns);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) throw DegenerateError("columns are rank deficient");
  // Unpivoted QR keeps the nested leading spans of the input columns.
  Eigen::HouseholderQR<Matrix> plain(columns);
  Matrix q = plain.householderQ() * Matrix::Identity(n, k);
  apply_sign_convention(q);
  return OrthonormalBasis(std::move(q));
}

OrthonormalBasis OrthonormalBasis::identity(Index n) { return OrthonormalBasis(Matrix::Identity(n, n)); }

OrthonormalBasis OrthonormalBasis::leading(Index k) const {
  if (k < 0 || k > rank()) throw DimensionError("leading(k): k out of range");
  return OrthonormalBasis(m_.leftCols(k));
}

EigenDecomposition top_eigvecs(const Matrix& m, Index k) {
  if (m.rows() != m.cols()) throw DimensionError("top_eigvecs: matrix is not square");
  const Index n = m.rows();
  if (k < 1 || k > n) {
    throw DimensionError("top_eigvecs: k=" + std::to_string(k) + " outside [1, " +
                         std::to_string(n) + "]");
  }
  if (!m.allFinite()) throw InputError("top_eigvecs: non-finite entries");
  Vector values;
  Matrix vectors;
  full_symmetric_eigen(symmetrized(m), values, vectors);
  Matrix top = vectors.leftCols(k);
  return {OrthonormalBasis::from_columns(std::move(top)), std::move(values)};
}

SingularDecomposition top_singvecs(const Matrix& m, Index k, Side side) {
  const Index n = m.rows();
  const Index c = m.cols();
  const Index r = std::min(n, c);
  if (k < 1 || k > r) {
    throw DimensionError("top_singvecs: k=" + std::to_string(k) + " outside [1, " +
                         std::to_string(r) + "]");
  }
  if (!m.allFinite()) throw InputError("top_singvecs: non-finite entries");

  const bool want_left = side != Side::right;
  const bool want_right = side != Side::left;
  const bool left_is_small = n <= c;

  Vector sigma;
  Matrix small_vecs;
  if (left_is_small) {
    gram_side(m * m.transpose(), k, sigma, small_vecs);
  } else {
    gram_side(m.transpose() * m, k, sigma, small_vecs);
  }

  SingularDecomposition out;
  out.values = sigma;
  const bool want_small = left_is_small ? want_left : want_right;
  const bool want_large = left_is_small ? want_right : want_left;
  if (want_small) {
    auto basis = OrthonormalBasis::from_columns(small_vecs);
    (left_is_small ? out.left : out.right) = std::move(basis);
  }
  if (want_large) {
    std::optional<Matrix> large = left_is_small
                                      ? back_multiply(m.transpose(), small_vecs, sigma, k)
                                      : back_multiply(m, small_vecs, sigma, k);
    if (!large) {
      Vector unused;
      Matrix vecs;
      if (left_is_small) {
        gram_side(m.transpose() * m, k, unused, vecs);
      } else {
        gram_side(m * m.transpose(), k, unused, vecs);
      }
      large = std::move(vecs);
    }
    auto basis = OrthonormalBasis::from_columns(std::move(*large));
    (left_is_small ? out.right : out.left) = std::move(basis);
  }
  return out;
}

Matrix projector(const OrthonormalBasis& b) { return b.matrix() * b.matrix().transpose(); }

Matrix projector(const Matrix& b) {
  const double err = orthonormality_error(b);
  if (err > kOrthonormalTol) {
    throw ContractError("projector: input columns are not orthonormal");
  }
  return b * b.transpose();
}

Matrix span_projector(const Matrix& a) { return projector(OrthonormalBasis::orthonormalize(a)); }

Matrix procrustes_align(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("procrustes_align: operand shapes differ");
  }
  if (a.cols() == 0) return Matrix(0, 0);
  if (!a.allFinite() || !b.allFinite()) throw InputError("procrustes_align: non-finite entries");
  Eigen::JacobiSVD<Matrix> rank_check(a);
  const Vector& sv = rank_check.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * std::max(sv(0), 1e-300))) {
    throw DegenerateError("procrustes_align: reference matrix is rank deficient");
  }
  Eigen::JacobiSVD<Matrix> svd(a.transpose() * b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(solver.eigenvalues().maxCoeff(), 0.0));
}

}  // namespace mpca
