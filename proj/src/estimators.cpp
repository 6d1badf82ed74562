#include "mpca/estimators.hpp"

#include <cmath>
#include <string>

#include "mpca/error.hpp"
#include "mpca/metrics.hpp"

namespace mpca {

namespace {

struct BasisPair {
  Matrix row;
  Matrix col;
};

struct IterationOutcome {
  BasisPair bases;
  int iterations = 0;
  bool converged = false;
};

// Shared fixed-point driver: step(current) -> next; stops when the larger of
// the two successive subspace distances falls below tol.
template <class Step>
IterationOutcome iterate_bases(BasisPair start, const IterationControl& ctl, Step&& step) {
  IterationOutcome out{std::move(start), 0, false};
  for (int i = 1; i <= ctl.max_iter; ++i) {
    BasisPair next = step(out.bases);
    const double delta = std::max(space_distance(next.row, out.bases.row),
                                  space_distance(next.col, out.bases.col));
    out.bases = std::move(next);
    out.iterations = i;
    if (delta < ctl.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

LoadingPair to_loadings(const BasisPair& b, Method method) {
  return LoadingPair::from_bases(OrthonormalBasis::from_columns(b.row),
                                 OrthonormalBasis::from_columns(b.col), method);
}

}  // namespace

void validate(const IterationControl& ctl) {
  if (!(ctl.tol > 0.0)) throw InputError("iteration tolerance must be positive");
  if (ctl.max_iter < 1) throw InputError("max_iter must be at least 1");
}

void validate_manifold_ranks(const Ranks& ranks, Index p, Index q) {
  validate_ranks(ranks, p, q);
  const Index r = std::min(p, q);
  if (std::max(ranks.p0, ranks.q0) > r) {
    throw InputError("manifold estimators need p0 ∨ q0 ≤ p ∧ q (got p0=" +
                     std::to_string(ranks.p0) + ", q0=" + std::to_string(ranks.q0) +
                     ", p ∧ q=" + std::to_string(r) + ")");
  }
}

SubspacePair best_subspace_op(const Matrix& x, Index r0) {
  const Index r = std::min(x.rows(), x.cols());
  if (r0 < 1 || r0 > r) {
    throw InputError("best_subspace_op: r0=" + std::to_string(r0) + " outside [1, " +
                     std::to_string(r) + "]");
  }
  auto svd = top_singvecs(x, r0, Side::both);
  return {std::move(*svd.left), std::move(*svd.right)};
}

AveragedProjectors averaged_projectors_op(const kernels::ObservationSpectra& spectra, Index r0) {
  return {kernels::average_spectral_projector(spectra, Side::left, r0),
          kernels::average_spectral_projector(spectra, Side::right, r0)};
}

LoadingPair mpca_op(const kernels::ObservationSpectra& spectra, const Ranks& ranks) {
  validate_manifold_ranks(ranks, spectra.p(), spectra.q());
  const auto avg = averaged_projectors_op(spectra, ranks.r0());
  auto row = top_eigvecs(avg.row, ranks.p0);
  auto col = top_eigvecs(avg.col, ranks.q0);
  return LoadingPair::from_bases(row.vectors, col.vectors, Method::mpca_op);
}

LoadingPair mpca_op(const ObservationSet& x, const Ranks& ranks) {
  validate_manifold_ranks(ranks, x.p(), x.q());
  return mpca_op(kernels::observation_spectra(x, ranks.r0()), ranks);
}

FactorModelFit mpca_f_from(const ObservationSet& x, const LoadingPair& warm_start,
                           const Ranks& ranks, const IterationControl& ctl) {
  validate_manifold_ranks(ranks, x.p(), x.q());
  validate(ctl);
  if (warm_start.r_hat.rows() != x.p() || warm_start.r_hat.cols() != ranks.p0 ||
      warm_start.c_hat.rows() != x.q() || warm_start.c_hat.cols() != ranks.q0) {
    throw DimensionError("mpca_f: warm start loadings do not match data and ranks");
  }
  const Index r0 = ranks.r0();
  auto outcome = iterate_bases({warm_start.row_basis(), warm_start.col_basis()}, ctl,
                               [&](const BasisPair& cur) {
                                 auto rows = kernels::projected_leading_vectors(x, cur.col, r0,
                                                                                Side::left);
                                 auto cols = kernels::projected_leading_vectors(x, cur.row, r0,
                                                                                Side::right);
                                 const Matrix avg_row = kernels::average_projector(rows, r0);
                                 const Matrix avg_col = kernels::average_projector(cols, r0);
                                 return BasisPair{top_eigvecs(avg_row, ranks.p0).vectors.matrix(),
                                                  top_eigvecs(avg_col, ranks.q0).vectors.matrix()};
                               });
  return make_fit(x, to_loadings(outcome.bases, Method::mpca_f), outcome.iterations,
                  outcome.converged);
}

FactorModelFit mpca_f(const ObservationSet& x, const Ranks& ranks, const IterationControl& ctl) {
  return mpca_f_from(x, mpca_op(x, ranks), ranks, ctl);
}

LoadingPair pca_2d2(const ObservationSet& x, const Ranks& ranks) {
  validate_ranks(ranks, x.p(), x.q());
  auto row = top_eigvecs(kernels::gram_average(x, Side::left), ranks.p0);
  auto col = top_eigvecs(kernels::gram_average(x, Side::right), ranks.q0);
  return LoadingPair::from_bases(row.vectors, col.vectors, Method::pca_2d2);
}

FactorModelFit pe_fit(const ObservationSet& x, const Ranks& ranks, const IterationControl& ctl) {
  validate(ctl);
  const LoadingPair init = pca_2d2(x, ranks);
  auto outcome = iterate_bases(
      {init.row_basis(), init.col_basis()}, ctl, [&](const BasisPair& cur) {
        const Matrix row_cov = kernels::projected_covariance(x, cur.col, Side::left);
        const Matrix col_cov = kernels::projected_covariance(x, cur.row, Side::right);
        return BasisPair{top_eigvecs(row_cov, ranks.p0).vectors.matrix(),
                         top_eigvecs(col_cov, ranks.q0).vectors.matrix()};
      });
  return make_fit(x, to_loadings(outcome.bases, Method::pe), outcome.iterations, outcome.converged);
}

LoadingPair pe_estimate(const ObservationSet& x, const Ranks& ranks, const IterationControl& ctl) {
  return pe_fit(x, ranks, ctl).loadings;
}

FactorModelFit estimate(const ObservationSet& x, Method method, const Ranks& ranks,
                        const IterationControl& ctl) {
  switch (method) {
    case Method::mpca_op: return make_fit(x, mpca_op(x, ranks));
    case Method::mpca_f: return mpca_f(x, ranks, ctl);
    case Method::pca_2d2: return make_fit(x, pca_2d2(x, ranks));
    case Method::pe: return pe_fit(x, ranks, ctl);
  }
  throw InputError("unknown estimator");
}

FactorModelFit estimate(const ObservationSet& x, const kernels::ObservationSpectra& spectra,
                        Method method, const Ranks& ranks, const IterationControl& ctl) {
  switch (method) {
    case Method::mpca_op: return make_fit(x, mpca_op(spectra, ranks));
    case Method::mpca_f: return mpca_f_from(x, mpca_op(spectra, ranks), ranks, ctl);
    default: return estimate(x, method, ranks, ctl);
  }
}

double varimax_criterion(const Matrix& loadings) {
  const auto n = static_cast<double>(loadings.rows());
  double total = 0.0;
  for (Index j = 0; j < loadings.cols(); ++j) {
    const Vector sq = loadings.col(j).array().square();
    const double m2 = sq.sum() / n;
    const double m4 = sq.squaredNorm() / n;
    total += m4 - m2 * m2;
  }
  return total;
}

VarimaxResult varimax(const Matrix& loadings, double tol, int max_sweeps) {
  const Index k = loadings.cols();
  if (k < 1) throw InputError("varimax needs at least one column");
  if (!loadings.allFinite()) throw InputError("varimax: non-finite loadings");
  VarimaxResult out{loadings, Matrix::Identity(k, k), varimax_criterion(loadings), 0};
  if (k == 1) return out;
  const auto n = static_cast<double>(loadings.rows());

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (Index a = 0; a + 1 < k; ++a) {
      for (Index b = a + 1; b < k; ++b) {
        const Vector x = out.loadings.col(a);
        const Vector y = out.loadings.col(b);
        const Vector u = x.array().square() - y.array().square();
        const Vector v = 2.0 * x.array() * y.array();
        const double su = u.sum();
        const double sv = v.sum();
        const double num = 2.0 * u.dot(v) - 2.0 * su * sv / n;
        const double den = (u.squaredNorm() - v.squaredNorm()) - (su * su - sv * sv) / n;
        const double angle = 0.25 * std::atan2(num, den);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        out.loadings.col(a) = c * x + s * y;
        out.loadings.col(b) = -s * x + c * y;
        const Vector ta = out.rotation.col(a);
        const Vector tb = out.rotation.col(b);
        out.rotation.col(a) = c * ta + s * tb;
        out.rotation.col(b) = -s * ta + c * tb;
      }
    }
    const double next = varimax_criterion(out.loadings);
    const double gain = next - out.criterion;
    out.criterion = next;
    out.sweeps = sweep;
    if (gain < tol) break;
  }
  return out;
}

}  // namespace mpca
