#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpca/error.hpp"
#include "mpca/metrics.hpp"
#include "mpca/sampling.hpp"
#include "oracles.hpp"

using namespace mpca;

namespace {

Matrix basis_vector(Index n, Index i) {
  Matrix m = Matrix::Zero(n, 1);
  m(i, 0) = 1.0;
  return m;
}

std::vector<int> months_from(int first_year, int count) {
  std::vector<int> out;
  for (int k = 0; k < count; ++k) out.push_back((first_year + k / 12) * 100 + k % 12 + 1);
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("space distance examples") {
  const Matrix a = oracle::gaussian(5, 2, 1);
  CHECK(space_distance(a, a) <= 1e-15);
  CHECK(space_distance(basis_vector(2, 0), basis_vector(2, 1)) == doctest::Approx(1.0));
  Matrix diag(2, 1);
  diag << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(space_distance(basis_vector(2, 0), diag) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(space_distance(basis_vector(2, 0), diag) == doctest::Approx(0.70711).epsilon(1e-5));
}

TEST_CASE("space distance errors") {
  CHECK_THROWS_AS(space_distance(Matrix::Zero(3, 1), basis_vector(3, 0)), InputError);
  CHECK_THROWS_AS(space_distance(Matrix::Ones(3, 2), Matrix::Identity(3, 2)), InputError);
  CHECK_THROWS_AS(space_distance(Matrix::Identity(3, 2), Matrix::Identity(3, 1)), DimensionError);
}

TEST_CASE("space distance is symmetric and depends only on spans") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix a = oracle::gaussian(9, 3, seed);
    const Matrix b = oracle::gaussian(9, 3, seed + 50);
    const double d = space_distance(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(std::abs(d - space_distance(b, a)) <= 1e-12);
    const Matrix qa = oracle::random_orthonormal(3, 3, seed + 100);
    const Matrix qb = oracle::random_orthonormal(3, 3, seed + 200);
    CHECK(std::abs(d - space_distance(a * qa, b * qb)) <= 1e-12);
    CHECK(std::abs(d - space_distance(3.0 * a, b)) <= 1e-12);
    CHECK(std::abs(d - oracle::span_distance(a, b)) <= 1e-10);
  }
}

TEST_CASE("projector identity for the distance") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 4 + static_cast<int>(seed % 7);
    const int k = 1 + static_cast<int>(seed % 3);
    const Matrix a = oracle::gaussian(n, k, seed);
    const Matrix b = oracle::gaussian(n, k, seed + 1000);
    const double lhs = std::sqrt(2.0 * k) * space_distance(a, b);
    CHECK(std::abs(lhs - (oracle::proj(a) - oracle::proj(b)).norm()) <= 1e-10);
  }
}

TEST_CASE("common-component errors examples") {
  std::vector<Matrix> a{oracle::gaussian(4, 3, 1), oracle::gaussian(4, 3, 2)};
  const auto zero = cc_errors(a, a);
  CHECK(zero.mse == 0.0);
  CHECK(zero.op_max == 0.0);

  auto b = a;
  const double delta = 0.75;
  b[1](2, 1) += delta;
  const auto one = cc_errors(b, a);
  CHECK(one.mse == doctest::Approx(delta * delta / (2.0 * 12.0)));
  CHECK(one.op_max == doctest::Approx(delta / std::sqrt(12.0)));

  std::vector<Matrix> shorter{a[0]};
  CHECK_THROWS_AS(cc_errors(shorter, a), InputError);
  std::vector<Matrix> wrong{a[0], Matrix::Zero(3, 4)};
  CHECK_THROWS_AS(cc_errors(wrong, a), InputError);
}

TEST_CASE("common-component errors match a per-element recomputation") {
  std::vector<Matrix> a;
  std::vector<Matrix> b;
  for (std::uint64_t t = 0; t < 6; ++t) {
    a.push_back(oracle::gaussian(5, 4, 10 + t));
    b.push_back(oracle::gaussian(5, 4, 20 + t));
  }
  double sum = 0.0;
  double worst = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 4; ++j) sum += std::pow(a[t](i, j) - b[t](i, j), 2);
    const Matrix d = a[t] - b[t];
    worst = std::max(worst, std::sqrt(oracle::jacobi_eigen(d.transpose() * d).values(0)));
  }
  const auto e = cc_errors(a, b);
  CHECK(e.mse == doctest::Approx(sum / (6.0 * 20.0)).epsilon(1e-12));
  CHECK(e.op_max == doctest::Approx(worst / std::sqrt(20.0)).epsilon(1e-10));
}

TEST_CASE("common-component errors are unitarily invariant") {
  std::vector<Matrix> a;
  std::vector<Matrix> b;
  for (std::uint64_t t = 0; t < 5; ++t) {
    a.push_back(oracle::gaussian(6, 5, 30 + t));
    b.push_back(oracle::gaussian(6, 5, 40 + t));
  }
  const Matrix u = oracle::random_orthonormal(6, 6, 1);
  const Matrix v = oracle::random_orthonormal(5, 5, 2);
  auto ra = a;
  auto rb = b;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ra[t] = u * a[t] * v.transpose();
    rb[t] = u * b[t] * v.transpose();
  }
  const auto e1 = cc_errors(a, b);
  const auto e2 = cc_errors(ra, rb);
  CHECK(std::abs(e1.mse - e2.mse) <= 1e-9);
  CHECK(std::abs(e1.op_max - e2.op_max) <= 1e-9);
}

TEST_CASE("mean and sample standard deviation") {
  const std::vector<double> v{1.0, 2.0, 4.0};
  const auto [m, s] = mean_sd(v);
  CHECK(m == doctest::Approx(7.0 / 3.0));
  CHECK(s == doctest::Approx(std::sqrt(((16.0 + 1.0 + 25.0) / 9.0) / 2.0)));
  CHECK(mean_sd(std::vector<double>{5.0}).second == 0.0);
}

TEST_CASE("evaluate_fit on an exact fit") {
  SimulationConfig cfg;
  cfg.p = 10;
  cfg.q = 8;
  cfg.T = 5;
  cfg.s_e = 0.0;
  cfg.seed = 3;
  const auto data = gen_dataset(cfg);
  const auto fit = estimate(data.observations, Method::pca_2d2, {3, 3});
  const auto report = evaluate_fit(data.observations, fit, data.truth);
  CHECK(report.d_r <= 1e-8);
  CHECK(report.d_c <= 1e-8);
  CHECK(report.mse <= 1e-20);
  CHECK(report.op_max <= 1e-10);
}

TEST_CASE("rolling validation on a noiseless series is exact") {
  const Matrix r = std::sqrt(4.0) * oracle::random_orthonormal(4, 1, 1);
  const Matrix c = std::sqrt(3.0) * oracle::random_orthonormal(3, 2, 2);
  std::vector<Matrix> xs;
  for (int k = 0; k < 48; ++k) xs.push_back(r * oracle::gaussian(1, 2, 100 + static_cast<std::uint64_t>(k)) * c.transpose());
  LabeledSeries series{ObservationSet(std::move(xs)), months_from(2000, 48)};
  RollingOptions opts;
  opts.first_year = 2002;
  opts.last_year = 2003;
  opts.bandwidth = 2;
  const auto report = rolling_validate(series, opts);
  REQUIRE(report.years.size() == 2);
  CHECK(report.years[0].year == 2002);
  for (const auto& y : report.years) {
    CHECK(y.mse <= 1e-10);
    CHECK(y.op_max <= 1e-10);
  }
}

TEST_CASE("rolling validation hand window") {
  std::vector<Matrix> xs;
  for (int m = 0; m < 24; ++m) {
    Matrix y(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) y(i, j) = std::sin(m + 2 * i + 3 * j) + (i == 0 ? 1.5 : 0.5) * (j + 1);
    xs.push_back(y);
  }
  LabeledSeries series{ObservationSet(std::move(xs)), months_from(2010, 24)};
  RollingOptions opts;
  opts.first_year = opts.last_year = 2011;
  opts.bandwidth = 1;
  opts.ranks = {1, 1};
  opts.method = Method::pca_2d2;
  const auto report = rolling_validate(series, opts);
  REQUIRE(report.years.size() == 1);
  CHECK(report.years[0].mse == doctest::Approx(0.51043108346707067).epsilon(1e-12));
  CHECK(report.years[0].op_max == doctest::Approx(0.78463767288506669).epsilon(1e-12));
  CHECK(report.mse_mean == report.years[0].mse);
  CHECK(report.mse_sd == 0.0);
}

TEST_CASE("rolling validation errors") {
  std::vector<Matrix> xs(30, Matrix::Ones(3, 3));
  LabeledSeries series{ObservationSet(std::move(xs)), months_from(2000, 30)};
  RollingOptions opts;
  opts.ranks = {1, 1};
  opts.first_year = opts.last_year = 2001;
  opts.bandwidth = 2;
  CHECK_THROWS_AS(rolling_validate(series, opts), InputError);
  opts.bandwidth = 1;
  opts.first_year = opts.last_year = 2003;
  CHECK_THROWS_AS(rolling_validate(series, opts), InputError);
  opts.bandwidth = 0;
  CHECK_THROWS_AS(rolling_validate(series, opts), InputError);
}

}  // TEST_SUITE
