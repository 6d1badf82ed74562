#include "mpca/rank_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mpca/error.hpp"

namespace mpca {

namespace {

Vector descending_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw DegenerateError("eigenvalue computation failed");
  return solver.eigenvalues().reverse();
}

struct PairStep {
  Index p0 = 1;
  Index q0 = 1;
  RatioTrace trace;
  double min_ratio() const {
    return std::min(trace.row[static_cast<std::size_t>(p0 - 1)],
                    trace.col[static_cast<std::size_t>(q0 - 1)]);
  }
};

PairStep ratio_step(const Matrix& row_matrix, const Matrix& col_matrix, Index r_max) {
  PairStep step;
  step.p0 = eigen_ratio_argmax(descending_eigenvalues(row_matrix), r_max, &step.trace.row);
  step.q0 = eigen_ratio_argmax(descending_eigenvalues(col_matrix), r_max, &step.trace.col);
  return step;
}

// Iterates step(p0, q0) until the pair repeats consecutively. When an earlier
// pair recurs, the cycle's pair with the largest minimum selected ratio wins.
template <class Step>
RankSelection iterate_pairs(PairStep start, RankSelection seed, const IterationControl& ctl,
                            Step&& step) {
  std::vector<PairStep> history{std::move(start)};
  RankSelection out = std::move(seed);
  out.converged = false;
  for (int i = 1; i <= ctl.max_iter; ++i) {
    const PairStep& cur = history.back();
    PairStep next = step(cur.p0, cur.q0);
    out.iterations = i;
    out.r0_hat = std::min(cur.p0, cur.q0);
    out.ratio_traces.push_back(next.trace);
    if (next.p0 == cur.p0 && next.q0 == cur.q0) {
      out.p0_hat = next.p0;
      out.q0_hat = next.q0;
      out.converged = true;
      return out;
    }
    auto seen = std::find_if(history.begin(), history.end(), [&](const PairStep& s) {
      return s.p0 == next.p0 && s.q0 == next.q0;
    });
    if (seen != history.end()) {
      auto best = seen;
      for (auto it = seen; it != history.end(); ++it) {
        if (it->min_ratio() > best->min_ratio()) best = it;
      }
      out.p0_hat = best->p0;
      out.q0_hat = best->q0;
      out.r0_hat = std::min(best->p0, best->q0);
      out.cycled = true;
      return out;
    }
    history.push_back(std::move(next));
  }
  out.p0_hat = history.back().p0;
  out.q0_hat = history.back().q0;
  return out;
}

}  // namespace

std::string_view to_string(RankMethod m) {
  switch (m) {
    case RankMethod::mer_op: return "mer_op";
    case RankMethod::mer_f: return "mer_f";
    case RankMethod::er_2d2: return "er_2d2";
    case RankMethod::iter_er: return "iter_er";
  }
  return "unknown";
}

RankMethod parse_rank_method(std::string_view tag) {
  if (tag == "mer_op") return RankMethod::mer_op;
  if (tag == "mer_f") return RankMethod::mer_f;
  if (tag == "er_2d2") return RankMethod::er_2d2;
  if (tag == "iter_er") return RankMethod::iter_er;
  throw InputError("unknown rank selector '" + std::string(tag) + "'");
}

Index per_obs_rank(const Vector& sigma, Index r_max) {
  if (r_max < 1 || r_max + 1 > sigma.size()) {
    throw InputError("per_obs_rank: need r_max + 1 ≤ number of singular values");
  }
  if (!(sigma(0) > 0.0)) throw InputError("per_obs_rank: all-zero observation");
  Index best = 1;
  double best_ratio = -1.0;
  for (Index j = 1; j <= r_max; ++j) {
    const double next = sigma(j);
    const double ratio =
        next > 0.0 ? sigma(j - 1) / next : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return best;
}

Index per_obs_rank(const Matrix& x, Index r_max) {
  const Index r = std::min(x.rows(), x.cols());
  if (r_max < 1 || r_max + 1 > r) throw InputError("per_obs_rank: need r_max + 1 ≤ p ∧ q");
  return per_obs_rank(top_singvecs(x, 1, Side::left).values, r_max);
}

Index aggregate_ranks(std::span<const Index> ranks) {
  if (ranks.empty()) throw InputError("aggregate_ranks: empty list");
  double sum = 0.0;
  for (auto r : ranks) sum += static_cast<double>(r);
  return static_cast<Index>(std::floor(sum / static_cast<double>(ranks.size()) + 0.5));
}

Index eigen_ratio_argmax(const Vector& eigenvalues, Index r_max, std::vector<double>* ratios) {
  if (r_max < 1 || r_max + 1 > eigenvalues.size()) {
    throw InputError("eigen_ratio_argmax: need r_max + 1 ≤ number of eigenvalues");
  }
  Index best = 1;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (Index j = 1; j <= r_max; ++j) {
    const double ratio = eigenvalues(j - 1) / std::max(eigenvalues(j), kRatioFloor);
    if (ratios) ratios->push_back(ratio);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return best;
}

void validate_r_max(Index r_max, Index p, Index q) {
  if (r_max < 1 || r_max + 1 > std::min(p, q)) {
    throw InputError("r_max=" + std::to_string(r_max) + " requires r_max + 1 ≤ p ∧ q = " +
                     std::to_string(std::min(p, q)));
  }
}

RankSelection mer_op_at(const kernels::ObservationSpectra& spectra, Index r0, Index r_max,
                        AveragedProjectors* projectors) {
  validate_r_max(r_max, spectra.p(), spectra.q());
  const auto avg = averaged_projectors_op(spectra, r0);
  PairStep step = ratio_step(avg.row, avg.col, r_max);
  if (projectors) *projectors = avg;
  RankSelection out;
  out.method = RankMethod::mer_op;
  out.p0_hat = step.p0;
  out.q0_hat = step.q0;
  out.r0_hat = r0;
  out.ratio_traces.push_back(std::move(step.trace));
  return out;
}

RankSelection mer_op(const kernels::ObservationSpectra& spectra, Index r_max) {
  validate_r_max(r_max, spectra.p(), spectra.q());
  if (spectra.k() < r_max) {
    throw DimensionError("mer_op: spectra must store at least r_max leading vectors");
  }
  std::vector<Index> per_t(static_cast<std::size_t>(spectra.T()));
  for (Index t = 0; t < spectra.T(); ++t) {
    per_t[static_cast<std::size_t>(t)] = per_obs_rank(spectra[t].sigma, r_max);
  }
  const Index r0 = aggregate_ranks(per_t);
  return mer_op_at(spectra, r0, r_max);
}

RankSelection mer_op(const ObservationSet& x, Index r_max) {
  validate_r_max(r_max, x.p(), x.q());
  return mer_op(kernels::observation_spectra(x, r_max), r_max);
}

RankSelection mer_f(const ObservationSet& x, const kernels::ObservationSpectra& spectra,
                    Index r_max, const IterationControl& ctl) {
  validate(ctl);
  RankSelection warm = mer_op(spectra, r_max);
  PairStep start;
  start.p0 = warm.p0_hat;
  start.q0 = warm.q0_hat;
  start.trace = warm.ratio_traces.back();
  warm.method = RankMethod::mer_f;
  return iterate_pairs(std::move(start), std::move(warm), ctl, [&](Index p0, Index q0) {
    const Ranks ranks{p0, q0};
    const auto fit = mpca_f_from(x, mpca_op(spectra, ranks), ranks, ctl);
    const Index r0 = ranks.r0();
    const auto rows =
        kernels::projected_leading_vectors(x, fit.loadings.col_basis(), r0, Side::left);
    const auto cols =
        kernels::projected_leading_vectors(x, fit.loadings.row_basis(), r0, Side::right);
    return ratio_step(kernels::average_projector(rows, r0), kernels::average_projector(cols, r0),
                      r_max);
  });
}

RankSelection mer_f(const ObservationSet& x, Index r_max, const IterationControl& ctl) {
  validate_r_max(r_max, x.p(), x.q());
  return mer_f(x, kernels::observation_spectra(x, r_max), r_max, ctl);
}

RankSelection baseline_rank(const ObservationSet& x, RankMethod method, Index r_max,
                            const IterationControl& ctl) {
  validate_r_max(r_max, x.p(), x.q());
  if (method != RankMethod::er_2d2 && method != RankMethod::iter_er) {
    throw InputError("baseline_rank: method must be er_2d2 or iter_er");
  }
  PairStep first = ratio_step(kernels::gram_average(x, Side::left),
                              kernels::gram_average(x, Side::right), r_max);
  RankSelection out;
  out.method = method;
  out.p0_hat = first.p0;
  out.q0_hat = first.q0;
  out.r0_hat = std::min(first.p0, first.q0);
  out.ratio_traces.push_back(first.trace);
  if (method == RankMethod::er_2d2) return out;

  validate(ctl);
  return iterate_pairs(std::move(first), std::move(out), ctl, [&](Index p0, Index q0) {
    const auto fit = pe_fit(x, Ranks{p0, q0}, ctl);
    return ratio_step(kernels::projected_covariance(x, fit.loadings.col_basis(), Side::left),
                      kernels::projected_covariance(x, fit.loadings.row_basis(), Side::right),
                      r_max);
  });
}

RankSelection select_rank(const ObservationSet& x, const kernels::ObservationSpectra& spectra,
                          RankMethod method, Index r_max, const IterationControl& ctl) {
  switch (method) {
    case RankMethod::mer_op: return mer_op(spectra, r_max);
    case RankMethod::mer_f: return mer_f(x, spectra, r_max, ctl);
    default: return baseline_rank(x, method, r_max, ctl);
  }
}

RankSelection select_rank(const ObservationSet& x, RankMethod method, Index r_max,
                          const IterationControl& ctl) {
  switch (method) {
    case RankMethod::mer_op: return mer_op(x, r_max);
    case RankMethod::mer_f: return mer_f(x, r_max, ctl);
    default: return baseline_rank(x, method, r_max, ctl);
  }
}

}  // namespace mpca
