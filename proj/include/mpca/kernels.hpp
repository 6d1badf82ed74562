#pragma once

// Data-parallel kernels over the T observations.
//
// Each kernel in mpca::kernels runs its per-observation work under OpenMP and
// reduces through a fixed-shape tree: observations are cut into chunks of
// kReductionChunk, every chunk is summed sequentially, and the chunk partials
// are then added in index order. Results are bitwise identical for any thread
// count. mpca::kernels::reference holds plain serial loops with the same
// mathematics, kept for testing and benchmarking.

#include <span>
#include <vector>

#include "mpca/linalg.hpp"
#include "mpca/model.hpp"

namespace mpca::kernels {

inline constexpr Index kReductionChunk = 8;

/// Leading singular structure of one observation.
struct ObservationSpectrum {
  Vector sigma;  // all min(p, q) singular values, nonincreasing
  Matrix left;   // p×k leading left singular vectors
  Matrix right;  // q×k leading right singular vectors
};

/// Per-observation spectra with k leading vectors on each side.
class ObservationSpectra {
 public:
  ObservationSpectra() = default;
  ObservationSpectra(std::vector<ObservationSpectrum> items, Index p, Index q, Index k)
      : items_(std::move(items)), p_(p), q_(q), k_(k) {}

  Index T() const noexcept { return static_cast<Index>(items_.size()); }
  Index p() const noexcept { return p_; }
  Index q() const noexcept { return q_; }
  /// Number of stored leading vectors.
  Index k() const noexcept { return k_; }
  const ObservationSpectrum& operator[](Index t) const {
    return items_[static_cast<std::size_t>(t)];
  }

 private:
  std::vector<ObservationSpectrum> items_;
  Index p_ = 0;
  Index q_ = 0;
  Index k_ = 0;
};

ObservationSpectra observation_spectra(const ObservationSet& x, Index k);

/// (1/T) Σ_t B_t B_tᵀ using the leading r columns of each basis.
Matrix average_projector(std::span<const Matrix> bases, Index r);

/// Left (Side::left) or right (Side::right) stored vectors of the spectra,
/// averaged as projectors over their leading r columns.
Matrix average_spectral_projector(const ObservationSpectra& s, Side side, Index r);

/// For each t, the leading r eigenvectors of X_t B Bᵀ X_tᵀ (Side::left, B q×k
/// orthonormal) or of X_tᵀ B Bᵀ X_t (Side::right, B p×k orthonormal).
std::vector<Matrix> projected_leading_vectors(const ObservationSet& x, const Matrix& basis,
                                              Index r, Side side);

/// (1/T) Σ X_t X_tᵀ (Side::left) or (1/T) Σ X_tᵀ X_t (Side::right).
Matrix gram_average(const ObservationSet& x, Side side);

/// (1/(T k')) Σ X_t B Bᵀ X_tᵀ for Side::left where k' is the row count of B
/// (q), or the transposed analogue for Side::right. B is orthonormal.
Matrix projected_covariance(const ObservationSet& x, const Matrix& basis, Side side);

namespace reference {

ObservationSpectra observation_spectra(const ObservationSet& x, Index k);
Matrix average_projector(std::span<const Matrix> bases, Index r);
std::vector<Matrix> projected_leading_vectors(const ObservationSet& x, const Matrix& basis,
                                              Index r, Side side);
Matrix gram_average(const ObservationSet& x, Side side);
Matrix projected_covariance(const ObservationSet& x, const Matrix& basis, Side side);

}  // namespace reference

/// Leading r left singular vectors of a tall matrix Y (n×m, m small) through
/// its m×m Gram matrix, with the sign convention applied.
Matrix leading_left_vectors_thin(const Matrix& y, Index r);

}  // namespace mpca::kernels
