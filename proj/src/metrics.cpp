#include "mpca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mpca/error.hpp"

namespace mpca {

namespace {

void check_sequences(std::span<const Matrix> a, std::span<const Matrix> b) {
  if (a.size() != b.size()) throw InputError("sequences differ in length");
  if (a.empty()) throw InputError("sequences are empty");
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].rows() != b[t].rows() || a[t].cols() != b[t].cols() ||
        a[t].rows() != a.front().rows() || a[t].cols() != a.front().cols()) {
      throw InputError("shape mismatch at index " + std::to_string(t));
    }
  }
}

// Frobenius-squared norms and max operator norm over a sequence of residuals.
// ‖D‖_op ≤ ‖D‖_F lets most operator norms be skipped without changing the max.
CcErrors residual_errors(std::span<const Matrix> residuals) {
  const auto count = residuals.size();
  const double pq = static_cast<double>(residuals.front().rows() * residuals.front().cols());
  std::vector<double> fro2(count);
  for (std::size_t t = 0; t < count; ++t) fro2[t] = residuals[t].squaredNorm();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return fro2[i] > fro2[j]; });
  double worst = 0.0;
  for (auto t : order) {
    if (std::sqrt(fro2[t]) <= worst) break;
    worst = std::max(worst, op_norm(residuals[t]));
  }
  double total = 0.0;
  for (double v : fro2) total += v;
  return {total / (static_cast<double>(count) * pq), worst / std::sqrt(pq)};
}

}  // namespace

double space_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("space_distance: operands have different shapes");
  }
  if (a.cols() < 1) throw DimensionError("space_distance: empty bases");
  Matrix qa;
  Matrix qb;
  try {
    qa = OrthonormalBasis::orthonormalize(a).matrix();
    qb = OrthonormalBasis::orthonormalize(b).matrix();
  } catch (const DegenerateError&) {
    throw InputError("space_distance: rank-deficient input");
  }
  const Matrix residual = qb - qa * (qa.transpose() * qb);
  const double d = residual.norm() / std::sqrt(static_cast<double>(a.cols()));
  return std::min(d, 1.0);
}

CcErrors cc_errors(std::span<const Matrix> s_hat, std::span<const Matrix> s_true) {
  check_sequences(s_hat, s_true);
  std::vector<Matrix> residuals(s_hat.size());
  for (std::size_t t = 0; t < s_hat.size(); ++t) residuals[t] = s_hat[t] - s_true[t];
  return residual_errors(residuals);
}

MetricsReport evaluate_fit(const ObservationSet& x, const FactorModelFit& fit,
                           const GroundTruth& truth) {
  MetricsReport out;
  out.d_r = space_distance(fit.loadings.r_hat, truth.r);
  out.d_c = space_distance(fit.loadings.c_hat, truth.c);
  const auto s_hat = common_components(fit.loadings, fit.factors);
  if (static_cast<Index>(truth.s.size()) != x.T()) {
    throw DimensionError("evaluate_fit: truth length differs from data");
  }
  const auto cc = cc_errors(s_hat, truth.s);
  out.mse = cc.mse;
  out.op_max = cc.op_max;
  return out;
}

std::pair<double, double> mean_sd(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

RollingReport rolling_validate(const LabeledSeries& series, const RollingOptions& opts) {
  const auto& x = series.observations;
  if (static_cast<Index>(series.months.size()) != x.T()) {
    throw InputError("rolling_validate: month labels do not match observations");
  }
  if (opts.bandwidth < 1) throw InputError("rolling_validate: bandwidth must be at least 1");
  if (opts.first_year > opts.last_year) throw InputError("rolling_validate: empty year range");

  RollingReport report;
  for (int year = opts.first_year; year <= opts.last_year; ++year) {
    std::vector<Matrix> train;
    std::vector<Matrix> test;
    for (Index t = 0; t < x.T(); ++t) {
      const int y = series.year(t);
      if (y >= year - opts.bandwidth && y < year) train.push_back(x[t]);
      if (y == year) test.push_back(x[t]);
    }
    if (static_cast<int>(train.size()) < 12 * opts.bandwidth) {
      throw InputError("rolling_validate: insufficient history for test year " +
                       std::to_string(year) + " (" + std::to_string(train.size()) +
                       " training months, need " + std::to_string(12 * opts.bandwidth) + ")");
    }
    if (test.empty()) {
      throw InputError("rolling_validate: no observations in test year " + std::to_string(year));
    }
    const ObservationSet training(std::move(train));
    const auto fit = estimate(training, opts.method, opts.ranks, opts.ctl);
    const Matrix pr = projector(fit.loadings.row_basis());
    const Matrix pc = projector(fit.loadings.col_basis());
    std::vector<Matrix> residuals;
    residuals.reserve(test.size());
    for (const auto& y : test) residuals.push_back(y - pr * y * pc);
    const auto errs = residual_errors(residuals);
    report.years.push_back({year, errs.mse, errs.op_max});
  }
  std::vector<double> mse;
  std::vector<double> op;
  for (const auto& y : report.years) {
    mse.push_back(y.mse);
    op.push_back(y.op_max);
  }
  std::tie(report.mse_mean, report.mse_sd) = mean_sd(mse);
  std::tie(report.op_max_mean, report.op_max_sd) = mean_sd(op);
  return report;
}

}  // namespace mpca
