#include "mpca/model.hpp"

#include <cmath>
#include <string>

#include "mpca/error.hpp"

namespace mpca {

namespace {

void check_loadings_match(const ObservationSet& x, const LoadingPair& l) {
  if (l.r_hat.rows() != x.p() || l.c_hat.rows() != x.q()) {
    throw InputError("loadings are " + std::to_string(l.r_hat.rows()) + "x" +
                     std::to_string(l.r_hat.cols()) + " / " + std::to_string(l.c_hat.rows()) +
                     "x" + std::to_string(l.c_hat.cols()) + " but observations are " +
                     std::to_string(x.p()) + "x" + std::to_string(x.q()));
  }
}

// Re-expresses (R, F_t, C) with loadings R̃ = √p Q_R, C̃ = √q Q_C so that
// R̃ F̃_t C̃ᵀ = R F_t Cᵀ.
struct NormalizedTruth {
  Matrix r;
  Matrix c;
  Matrix left;   // F̃_t = left · F_t · right
  Matrix right;
};

NormalizedTruth normalize_truth(const GroundTruth& truth) {
  const auto p = static_cast<double>(truth.r.rows());
  const auto q = static_cast<double>(truth.c.rows());
  Eigen::HouseholderQR<Matrix> qr_r(truth.r);
  Eigen::HouseholderQR<Matrix> qr_c(truth.c);
  const Index p0 = truth.r.cols();
  const Index q0 = truth.c.cols();
  Matrix q_r = qr_r.householderQ() * Matrix::Identity(truth.r.rows(), p0);
  Matrix q_c = qr_c.householderQ() * Matrix::Identity(truth.c.rows(), q0);
  Matrix t_r = qr_r.matrixQR().topRows(p0).triangularView<Eigen::Upper>();
  Matrix t_c = qr_c.matrixQR().topRows(q0).triangularView<Eigen::Upper>();
  return {std::sqrt(p) * q_r, std::sqrt(q) * q_c, t_r / std::sqrt(p),
          t_c.transpose() / std::sqrt(q)};
}

}  // namespace

ObservationSet::ObservationSet(std::vector<Matrix> data) : data_(std::move(data)) {
  if (data_.empty()) throw InputError("observation set must contain at least one matrix");
  p_ = data_.front().rows();
  q_ = data_.front().cols();
  if (p_ < 1 || q_ < 1) throw InputError("observations must have positive dimensions");
  for (std::size_t t = 0; t < data_.size(); ++t) {
    if (data_[t].rows() != p_ || data_[t].cols() != q_) {
      throw InputError("observation " + std::to_string(t) + " has shape " +
                       std::to_string(data_[t].rows()) + "x" + std::to_string(data_[t].cols()) +
                       ", expected " + std::to_string(p_) + "x" + std::to_string(q_));
    }
    if (!data_[t].allFinite()) {
      throw InputError("observation " + std::to_string(t) + " has non-finite entries");
    }
  }
}

ObservationSet ObservationSet::scaled(double factor) const {
  std::vector<Matrix> out;
  out.reserve(data_.size());
  for (const auto& m : data_) out.push_back(factor * m);
  return ObservationSet(std::move(out));
}

ObservationSet ObservationSet::slice(Index first, Index count) const {
  if (first < 0 || count < 1 || first + count > T()) {
    throw DimensionError("slice outside the observation range");
  }
  return ObservationSet(std::vector<Matrix>(data_.begin() + first, data_.begin() + first + count));
}

void validate_ranks(const Ranks& ranks, Index p, Index q) {
  if (ranks.p0 < 1 || ranks.p0 > p || ranks.q0 < 1 || ranks.q0 > q) {
    throw InputError("ranks (" + std::to_string(ranks.p0) + "," + std::to_string(ranks.q0) +
                     ") invalid for " + std::to_string(p) + "x" + std::to_string(q) +
                     " observations");
  }
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::mpca_op: return "mpca_op";
    case Method::mpca_f: return "mpca_f";
    case Method::pca_2d2: return "pca_2d2";
    case Method::pe: return "pe";
  }
  return "unknown";
}

Method parse_method(std::string_view tag) {
  if (tag == "mpca_op") return Method::mpca_op;
  if (tag == "mpca_f") return Method::mpca_f;
  if (tag == "pca_2d2") return Method::pca_2d2;
  if (tag == "pe") return Method::pe;
  throw InputError("unknown estimator '" + std::string(tag) + "'");
}

LoadingPair LoadingPair::from_bases(const OrthonormalBasis& row, const OrthonormalBasis& col,
                                    Method method) {
  return {std::sqrt(static_cast<double>(row.dim())) * row.matrix(),
          std::sqrt(static_cast<double>(col.dim())) * col.matrix(), method};
}

Matrix LoadingPair::row_basis() const { return r_hat / std::sqrt(static_cast<double>(r_hat.rows())); }

Matrix LoadingPair::col_basis() const { return c_hat / std::sqrt(static_cast<double>(c_hat.rows())); }

double normalization_error(const LoadingPair& l) {
  const auto p = static_cast<double>(l.r_hat.rows());
  const auto q = static_cast<double>(l.c_hat.rows());
  const Matrix gr = l.r_hat.transpose() * l.r_hat / p;
  const Matrix gc = l.c_hat.transpose() * l.c_hat / q;
  const double er = (gr - Matrix::Identity(gr.rows(), gr.cols())).cwiseAbs().maxCoeff();
  const double ec = (gc - Matrix::Identity(gc.rows(), gc.cols())).cwiseAbs().maxCoeff();
  return std::max(er, ec);
}

std::vector<Matrix> factor_scores(const ObservationSet& x, const LoadingPair& l) {
  check_loadings_match(x, l);
  const double scale = 1.0 / static_cast<double>(x.p() * x.q());
  std::vector<Matrix> out(static_cast<std::size_t>(x.T()));
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < x.T(); ++t) {
    out[static_cast<std::size_t>(t)] = scale * (l.r_hat.transpose() * x[t] * l.c_hat);
  }
  return out;
}

std::vector<Matrix> common_components(const LoadingPair& l, std::span<const Matrix> factors) {
  std::vector<Matrix> out(factors.size());
  for (std::size_t t = 0; t < factors.size(); ++t) {
    if (factors[t].rows() != l.r_hat.cols() || factors[t].cols() != l.c_hat.cols()) {
      throw InputError("factor matrix shape does not match loadings");
    }
    out[t] = l.r_hat * factors[t] * l.c_hat.transpose();
  }
  return out;
}

std::vector<Matrix> common_components(const ObservationSet& x, const LoadingPair& l) {
  const auto f = factor_scores(x, l);
  return common_components(l, f);
}

FactorModelFit make_fit(const ObservationSet& x, LoadingPair l, int iterations, bool converged) {
  auto scores = factor_scores(x, l);
  return {std::move(l), std::move(scores), iterations, converged};
}

double aligned_factor_error(const FactorModelFit& fit, const GroundTruth& truth) {
  const auto& l = fit.loadings;
  if (truth.r.rows() != l.r_hat.rows() || truth.r.cols() != l.r_hat.cols() ||
      truth.c.rows() != l.c_hat.rows() || truth.c.cols() != l.c_hat.cols()) {
    throw DimensionError("aligned_factor_error: truth and estimate loadings differ in shape");
  }
  if (truth.f.size() != fit.factors.size()) {
    throw DimensionError("aligned_factor_error: factor sequences differ in length");
  }
  const NormalizedTruth nt = normalize_truth(truth);
  const double sp = std::sqrt(static_cast<double>(l.r_hat.rows()));
  const double sq = std::sqrt(static_cast<double>(l.c_hat.rows()));
  const Matrix h_r = procrustes_align(nt.r / sp, l.r_hat / sp);
  const Matrix h_c = procrustes_align(nt.c / sq, l.c_hat / sq);
  double worst = 0.0;
  for (std::size_t t = 0; t < truth.f.size(); ++t) {
    const Matrix f_norm = nt.left * truth.f[t] * nt.right;
    const Matrix diff = fit.factors[t] - h_r.transpose() * f_norm * h_c;
    worst = std::max(worst, op_norm(diff));
  }
  return worst;
}

}  // namespace mpca
