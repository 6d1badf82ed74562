#pragma once

// Loading-space estimators: the manifold (projection-averaging) estimators
// MPCA_op and MPCA_F, the covariance baselines (2D)²-PCA and PE, and varimax
// rotation for interpretation.

#include "mpca/kernels.hpp"
#include "mpca/linalg.hpp"
#include "mpca/model.hpp"

namespace mpca {

struct IterationControl {
  double tol = 1e-6;  // threshold on successive subspace distance
  int max_iter = 100;
};

void validate(const IterationControl& ctl);

struct SubspacePair {
  OrthonormalBasis row;  // p×r0
  OrthonormalBasis col;  // q×r0
};

/// Top-r0 left and right singular bases of one observation.
SubspacePair best_subspace_op(const Matrix& x, Index r0);

struct AveragedProjectors {
  Matrix row;  // (1/T) Σ P_{R̂_t}, p×p
  Matrix col;  // (1/T) Σ P_{Ĉ_t}, q×q
};

/// Average projectors onto the leading r0 per-observation singular subspaces.
AveragedProjectors averaged_projectors_op(const kernels::ObservationSpectra& spectra, Index r0);

/// Throws InputError unless ranks are valid and p0 ∨ q0 ≤ p ∧ q.
void validate_manifold_ranks(const Ranks& ranks, Index p, Index q);

LoadingPair mpca_op(const ObservationSet& x, const Ranks& ranks);
/// Same estimator from precomputed spectra (needs spectra.k() ≥ r0).
LoadingPair mpca_op(const kernels::ObservationSpectra& spectra, const Ranks& ranks);

FactorModelFit mpca_f(const ObservationSet& x, const Ranks& ranks, const IterationControl& ctl = {});
/// MPCA_F started from the given loadings instead of MPCA_op.
FactorModelFit mpca_f_from(const ObservationSet& x, const LoadingPair& warm_start,
                           const Ranks& ranks, const IterationControl& ctl = {});

LoadingPair pca_2d2(const ObservationSet& x, const Ranks& ranks);

LoadingPair pe_estimate(const ObservationSet& x, const Ranks& ranks,
                        const IterationControl& ctl = {});
/// PE with iteration bookkeeping and factor scores.
FactorModelFit pe_fit(const ObservationSet& x, const Ranks& ranks, const IterationControl& ctl = {});

/// Runs any estimator and returns a fit with factor scores.
FactorModelFit estimate(const ObservationSet& x, Method method, const Ranks& ranks,
                        const IterationControl& ctl = {});
/// As above, reusing precomputed spectra for the manifold estimators.
FactorModelFit estimate(const ObservationSet& x, const kernels::ObservationSpectra& spectra,
                        Method method, const Ranks& ranks, const IterationControl& ctl = {});

struct VarimaxResult {
  Matrix loadings;  // L T
  Matrix rotation;  // k×k orthonormal T
  double criterion = 0.0;
  int sweeps = 0;
};

/// Σ_j [ mean_i(l_ij⁴) − (mean_i l_ij²)² ]: raw varimax criterion.
double varimax_criterion(const Matrix& loadings);

/// Pairwise-rotation varimax without Kaiser row normalization. Sweeps until the
/// criterion improves by less than tol.
VarimaxResult varimax(const Matrix& loadings, double tol = 1e-8, int max_sweeps = 1000);

}  // namespace mpca
