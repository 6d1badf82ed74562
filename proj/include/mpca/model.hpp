#pragma once

// Matrix factor model X_t = R F_t Cᵀ + E_t: observation containers, loading
// estimates and recovery of factor scores / common components.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpca/linalg.hpp"

namespace mpca {

/// A length-T sequence of p×q observations.
class ObservationSet {
 public:
  ObservationSet() = default;
  /// Throws InputError when empty, ragged, or containing non-finite entries.
  explicit ObservationSet(std::vector<Matrix> data);

  Index T() const noexcept { return static_cast<Index>(data_.size()); }
  Index p() const noexcept { return p_; }
  Index q() const noexcept { return q_; }
  bool empty() const noexcept { return data_.empty(); }

  const Matrix& operator[](Index t) const { return data_[static_cast<std::size_t>(t)]; }
  std::span<const Matrix> matrices() const noexcept { return data_; }

  /// Every observation multiplied by a scalar.
  ObservationSet scaled(double factor) const;
  /// Observations [first, first + count).
  ObservationSet slice(Index first, Index count) const;

 private:
  std::vector<Matrix> data_;
  Index p_ = 0;
  Index q_ = 0;
};

struct Ranks {
  Index p0 = 1;
  Index q0 = 1;
  Index r0() const noexcept { return p0 < q0 ? p0 : q0; }
};

/// Throws InputError unless 1 ≤ p0 ≤ p and 1 ≤ q0 ≤ q.
void validate_ranks(const Ranks& ranks, Index p, Index q);

enum class Method { mpca_op, mpca_f, pca_2d2, pe };

std::string_view to_string(Method m);
/// Accepts the canonical tags ("mpca_op", "mpca_f", "pca_2d2", "pe").
Method parse_method(std::string_view tag);

/// Loadings normalized so that R̂ᵀR̂/p = I and ĈᵀĈ/q = I.
struct LoadingPair {
  Matrix r_hat;
  Matrix c_hat;
  Method method = Method::mpca_op;

  /// Scales orthonormal bases by √p and √q.
  static LoadingPair from_bases(const OrthonormalBasis& row, const OrthonormalBasis& col,
                                Method method);

  /// Orthonormal bases R̂/√p and Ĉ/√q.
  Matrix row_basis() const;
  Matrix col_basis() const;
};

/// Max-norm deviation of R̂ᵀR̂/p and ĈᵀĈ/q from the identity.
double normalization_error(const LoadingPair& l);

struct FactorModelFit {
  LoadingPair loadings;
  std::vector<Matrix> factors;  // F̂_t, p0×q0
  int iterations = 0;           // 0 for non-iterative estimators
  bool converged = true;
};

struct GroundTruth {
  Matrix r;
  Matrix c;
  std::vector<Matrix> f;
  std::vector<Matrix> s;  // S_t = R F_t Cᵀ
  std::vector<Matrix> e;  // optional noise sequence
};

/// F̂_t = R̂ᵀ X_t Ĉ / (pq).
std::vector<Matrix> factor_scores(const ObservationSet& x, const LoadingPair& l);

/// Ŝ_t = R̂ F̂_t Ĉᵀ (equivalently P_R̂ X_t P_Ĉ).
std::vector<Matrix> common_components(const ObservationSet& x, const LoadingPair& l);

/// Reconstructs Ŝ_t from precomputed scores.
std::vector<Matrix> common_components(const LoadingPair& l, std::span<const Matrix> factors);

/// Builds a fit with eagerly computed factor scores.
FactorModelFit make_fit(const ObservationSet& x, LoadingPair l, int iterations = 0,
                        bool converged = true);

/// max_t ‖F̂_t − H_Rᵀ F_t H_C‖_op with H_R, H_C the Procrustes rotations
/// aligning the normalized true loadings to the estimates. The truth is first
/// re-expressed with loadings satisfying RᵀR/p = I (common components unchanged).
double aligned_factor_error(const FactorModelFit& fit, const GroundTruth& truth);

}  // namespace mpca
