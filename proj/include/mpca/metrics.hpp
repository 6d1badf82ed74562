#pragma once

#include <span>
#include <vector>

#include "mpca/estimators.hpp"
#include "mpca/linalg.hpp"
#include "mpca/model.hpp"

namespace mpca {

/// Projection metric (1 − tr(P_A P_B)/k)^{1/2} between the column spans of two
/// p×k matrices (any column scaling). Evaluated as ‖(I − P_A) Q_B‖_F / √k for
/// accuracy near zero. Throws InputError on rank-deficient input.
double space_distance(const Matrix& a, const Matrix& b);

struct CcErrors {
  double mse = 0.0;     // (1/Tpq) Σ ‖Ŝ_t − S_t‖_F²
  double op_max = 0.0;  // (pq)^{-1/2} max_t ‖Ŝ_t − S_t‖_op
};

CcErrors cc_errors(std::span<const Matrix> s_hat, std::span<const Matrix> s_true);

struct MetricsReport {
  double d_r = 0.0;
  double d_c = 0.0;
  double mse = 0.0;
  double op_max = 0.0;
};

/// Loading distances and common-component errors of a fit against the truth.
MetricsReport evaluate_fit(const ObservationSet& x, const FactorModelFit& fit,
                           const GroundTruth& truth);

/// Monthly observations with YYYYMM labels in chronological order.
struct LabeledSeries {
  ObservationSet observations;
  std::vector<int> months;  // YYYYMM

  int year(Index t) const { return months[static_cast<std::size_t>(t)] / 100; }
};

struct RollingYear {
  int year = 0;
  double mse = 0.0;
  double op_max = 0.0;
};

struct RollingReport {
  std::vector<RollingYear> years;
  double mse_mean = 0.0;
  double mse_sd = 0.0;
  double op_max_mean = 0.0;
  double op_max_sd = 0.0;
};

struct RollingOptions {
  int first_year = 1996;
  int last_year = 2019;
  int bandwidth = 5;  // training window in years
  Ranks ranks{1, 2};
  Method method = Method::mpca_f;
  IterationControl ctl{};
};

/// For each test year y, fits loadings on the months of years [y − n, y − 1]
/// and scores the double-projection reconstruction P_R̂ Y P_Ĉ of the months of
/// year y: MSE_y = Σ‖Y − Ŷ‖_F²/(months·p·q), opMax_y = max‖Y − Ŷ‖_op/√(pq).
/// Throws InputError when a training window is incomplete or a test year is empty.
RollingReport rolling_validate(const LabeledSeries& series, const RollingOptions& opts);

/// Sample mean and standard deviation (n − 1 denominator; 0 when n < 2).
std::pair<double, double> mean_sd(std::span<const double> values);

}  // namespace mpca
