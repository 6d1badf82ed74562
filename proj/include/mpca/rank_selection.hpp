#pragma once

// Factor-number selection by eigenvalue ratios: the manifold selectors MER_op
// and MER_F (ratios of averaged-projector eigenvalues) and the covariance
// baselines (2D)²-ER and IterER.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpca/estimators.hpp"
#include "mpca/kernels.hpp"
#include "mpca/model.hpp"

namespace mpca {

enum class RankMethod { mer_op, mer_f, er_2d2, iter_er };

std::string_view to_string(RankMethod m);
RankMethod parse_rank_method(std::string_view tag);

inline constexpr Index kDefaultRMax = 8;
/// Floor applied to the denominator eigenvalue of a ratio.
inline constexpr double kRatioFloor = 1e-12;

/// Ratios inspected at one selection step: row[j−1] = λ_j/λ_{j+1}, j = 1..r_max.
struct RatioTrace {
  std::vector<double> row;
  std::vector<double> col;
};

struct RankSelection {
  Index p0_hat = 1;
  Index q0_hat = 1;
  Index r0_hat = 1;  // per-observation compression rank used by the final step
  RankMethod method = RankMethod::mer_op;
  std::vector<RatioTrace> ratio_traces;  // one entry per selection step
  int iterations = 0;
  bool converged = true;
  bool cycled = false;
};

/// argmax_{j ≤ r_max} σ_j/σ_{j+1}; σ_{j+1} = 0 counts as +∞; ties go to the
/// smallest j. Throws InputError when all values are zero.
Index per_obs_rank(const Vector& sigma, Index r_max);
Index per_obs_rank(const Matrix& x, Index r_max);

/// ⌊mean + 1/2⌋ of per-observation ranks.
Index aggregate_ranks(std::span<const Index> ranks);

/// argmax_{j ≤ r_max} λ_j / max(λ_{j+1}, kRatioFloor) over nonincreasing
/// eigenvalues; ties go to the smallest j. Ratios are appended to *ratios.
Index eigen_ratio_argmax(const Vector& eigenvalues, Index r_max, std::vector<double>* ratios);

/// Throws InputError unless 1 ≤ r_max and r_max + 1 ≤ p ∧ q.
void validate_r_max(Index r_max, Index p, Index q);

RankSelection mer_op(const ObservationSet& x, Index r_max = kDefaultRMax);
/// Same selector from precomputed spectra storing at least r_max leading vectors.
RankSelection mer_op(const kernels::ObservationSpectra& spectra, Index r_max = kDefaultRMax);

/// MER_op with the compression rank forced to r0 (skips the per-observation
/// rank rule). Exposed so its averaged projectors can be compared with MPCA_op.
RankSelection mer_op_at(const kernels::ObservationSpectra& spectra, Index r0, Index r_max,
                        AveragedProjectors* projectors = nullptr);

RankSelection mer_f(const ObservationSet& x, Index r_max = kDefaultRMax,
                    const IterationControl& ctl = {});
RankSelection mer_f(const ObservationSet& x, const kernels::ObservationSpectra& spectra,
                    Index r_max = kDefaultRMax, const IterationControl& ctl = {});

/// (2D)²-ER (er_2d2) or IterER (iter_er).
RankSelection baseline_rank(const ObservationSet& x, RankMethod method,
                            Index r_max = kDefaultRMax, const IterationControl& ctl = {});

/// Dispatch over all four selectors.
RankSelection select_rank(const ObservationSet& x, RankMethod method, Index r_max = kDefaultRMax,
                          const IterationControl& ctl = {});
RankSelection select_rank(const ObservationSet& x, const kernels::ObservationSpectra& spectra,
                          RankMethod method, Index r_max = kDefaultRMax,
                          const IterationControl& ctl = {});

}  // namespace mpca
