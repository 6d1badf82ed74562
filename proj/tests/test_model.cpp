#include <doctest.h>

#include <cmath>

#include "mpca/error.hpp"
#include "mpca/estimators.hpp"
#include "mpca/metrics.hpp"
#include "mpca/model.hpp"
#include "mpca/sampling.hpp"
#include "oracles.hpp"

using namespace mpca;

namespace {

struct Noiseless {
  ObservationSet x;
  GroundTruth truth;
  LoadingPair loadings;  // true loadings normalized to RᵀR/p = I
};

Noiseless noiseless_model(Index p, Index q, Index p0, Index q0, Index T, std::uint64_t seed) {
  Noiseless out;
  const Matrix r = std::sqrt(static_cast<double>(p)) * oracle::random_orthonormal(int(p), int(p0), seed);
  const Matrix c = std::sqrt(static_cast<double>(q)) * oracle::random_orthonormal(int(q), int(q0), seed + 1);
  std::vector<Matrix> xs;
  for (Index t = 0; t < T; ++t) {
    const Matrix f = oracle::gaussian(int(p0), int(q0), seed + 10 + static_cast<std::uint64_t>(t));
    out.truth.f.push_back(f);
    out.truth.s.push_back(r * f * c.transpose());
    xs.push_back(out.truth.s.back());
  }
  out.truth.r = r;
  out.truth.c = c;
  out.x = ObservationSet(std::move(xs));
  out.loadings = {r, c, Method::mpca_op};
  return out;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("ObservationSet validation") {
  CHECK_THROWS_AS(ObservationSet(std::vector<Matrix>{}), InputError);
  CHECK_THROWS_AS(ObservationSet({Matrix::Zero(2, 2), Matrix::Zero(2, 3)}), InputError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = INFINITY;
  CHECK_THROWS_AS(ObservationSet({bad}), InputError);
  const ObservationSet x({Matrix::Ones(2, 3), Matrix::Zero(2, 3)});
  CHECK(x.T() == 2);
  CHECK(x.p() == 2);
  CHECK(x.q() == 3);
  CHECK(x.scaled(2.0)[0](1, 2) == 2.0);
  CHECK(x.slice(1, 1)[0].isZero());
}

TEST_CASE("Ranks validation and r0") {
  CHECK(Ranks{2, 3}.r0() == 2);
  CHECK_NOTHROW(validate_ranks({2, 3}, 4, 3));
  CHECK_THROWS_AS(validate_ranks({0, 1}, 4, 3), InputError);
  CHECK_THROWS_AS(validate_ranks({1, 4}, 4, 3), InputError);
}

TEST_CASE("method tags") {
  for (Method m : {Method::mpca_op, Method::mpca_f, Method::pca_2d2, Method::pe}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("pca"), InputError);
}

TEST_CASE("factor scores recover noiseless factors with true loadings") {
  const auto m = noiseless_model(7, 5, 2, 3, 4, 1);
  const auto f = factor_scores(m.x, m.loadings);
  REQUIRE(f.size() == 4);
  for (std::size_t t = 0; t < f.size(); ++t) CHECK(max_abs(f[t] - m.truth.f[t]) <= 1e-10);
  CHECK(normalization_error(m.loadings) <= 1e-12);
}

TEST_CASE("factor score hand example") {
  Matrix r(2, 1);
  r << 1, 1;
  Matrix c(2, 1);
  c << 1, -1;
  Matrix x(2, 2);
  x << 2, 0, 0, -2;
  const auto f = factor_scores(ObservationSet({x}), LoadingPair{r, c, Method::mpca_op});
  CHECK(f[0](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("zero observations give zero scores") {
  const auto m = noiseless_model(4, 4, 1, 2, 1, 3);
  const ObservationSet zero({Matrix::Zero(4, 4), Matrix::Zero(4, 4)});
  for (const auto& f : factor_scores(zero, m.loadings)) CHECK(f.isZero());
}

TEST_CASE("dimension mismatch raises") {
  const auto m = noiseless_model(4, 4, 1, 1, 2, 3);
  const ObservationSet other({Matrix::Zero(5, 4)});
  CHECK_THROWS_AS(factor_scores(other, m.loadings), InputError);
  CHECK_THROWS_AS(common_components(other, m.loadings), InputError);
}

TEST_CASE("common components of noiseless data are the data") {
  const auto m = noiseless_model(6, 5, 2, 2, 3, 7);
  const auto s = common_components(m.x, m.loadings);
  for (Index t = 0; t < m.x.T(); ++t) CHECK(max_abs(s[t] - m.x[t]) <= 1e-10);
}

TEST_CASE("components orthogonal to the loading spans vanish") {
  const auto m = noiseless_model(5, 4, 2, 1, 1, 8);
  const Matrix pr = oracle::proj(m.truth.r);
  const Matrix x = (Matrix::Identity(5, 5) - pr) * oracle::gaussian(5, 4, 9);
  for (const auto& s : common_components(ObservationSet({x}), m.loadings)) CHECK(max_abs(s) <= 1e-12);
}

TEST_CASE("common components equal the double projection") {
  const ObservationSet x({oracle::gaussian(6, 4, 1), oracle::gaussian(6, 4, 2), oracle::gaussian(6, 4, 3)});
  const LoadingPair l{std::sqrt(6.0) * oracle::random_orthonormal(6, 2, 4),
                      std::sqrt(4.0) * oracle::random_orthonormal(4, 3, 5), Method::pe};
  const auto s = common_components(x, l);
  const auto via_scores = common_components(l, factor_scores(x, l));
  const Matrix pr = oracle::proj(l.r_hat);
  const Matrix pc = oracle::proj(l.c_hat);
  for (Index t = 0; t < x.T(); ++t) {
    CHECK(max_abs(s[t] - pr * x[t] * pc) <= 1e-10);
    CHECK(max_abs(via_scores[t] - pr * x[t] * pc) <= 1e-10);
  }
  // Applying the reconstruction to its own output is a fixed point.
  const auto again = common_components(ObservationSet(s), l);
  for (Index t = 0; t < x.T(); ++t) CHECK(max_abs(again[t] - s[t]) <= 1e-10);
}

TEST_CASE("make_fit stores eager scores") {
  const auto m = noiseless_model(5, 5, 2, 2, 3, 12);
  const auto fit = make_fit(m.x, m.loadings, 4, false);
  CHECK(fit.factors.size() == 3);
  CHECK(fit.iterations == 4);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("LoadingPair from bases is normalized") {
  const auto row = OrthonormalBasis::orthonormalize(oracle::gaussian(9, 2, 1));
  const auto col = OrthonormalBasis::orthonormalize(oracle::gaussian(4, 3, 2));
  const auto l = LoadingPair::from_bases(row, col, Method::mpca_f);
  CHECK(normalization_error(l) <= 1e-12);
  CHECK(max_abs(l.row_basis() - row.matrix()) <= 1e-15);
}

TEST_CASE("aligned factor error vanishes for exact and rotated loadings") {
  const auto m = noiseless_model(8, 6, 2, 3, 5, 20);
  const auto exact = make_fit(m.x, m.loadings);
  CHECK(aligned_factor_error(exact, m.truth) <= 1e-9);

  const Matrix q1 = oracle::random_orthonormal(2, 2, 21);
  const Matrix q2 = oracle::random_orthonormal(3, 3, 22);
  const auto rotated = make_fit(m.x, LoadingPair{m.truth.r * q1, m.truth.c * q2, Method::mpca_op});
  CHECK(aligned_factor_error(rotated, m.truth) <= 1e-9);
}

TEST_CASE("aligned factor error is invariant under rotation of the estimate") {
  const auto m = noiseless_model(8, 6, 2, 2, 4, 30);
  std::vector<Matrix> noisy;
  for (Index t = 0; t < m.x.T(); ++t) noisy.push_back(m.x[t] + 0.3 * oracle::gaussian(8, 6, 40 + t));
  const ObservationSet x(std::move(noisy));
  const LoadingPair est{std::sqrt(8.0) * oracle::random_orthonormal(8, 2, 50),
                        std::sqrt(6.0) * oracle::random_orthonormal(6, 2, 51), Method::pe};
  const double base = aligned_factor_error(make_fit(x, est), m.truth);
  CHECK(base > 0.0);
  for (std::uint64_t seed = 60; seed < 64; ++seed) {
    const LoadingPair rot{est.r_hat * oracle::random_orthonormal(2, 2, seed),
                          est.c_hat * oracle::random_orthonormal(2, 2, seed + 100), Method::pe};
    CHECK(std::abs(aligned_factor_error(make_fit(x, rot), m.truth) - base) <= 1e-9);
  }
}

TEST_CASE("aligned factor error shrinks with the noise scale") {
  std::vector<double> errors;
  for (double s_e : {1.0, 0.1, 0.01}) {
    SimulationConfig cfg;
    cfg.p = cfg.q = 100;
    cfg.s_e = s_e;
    cfg.seed = 5;
    const auto data = gen_dataset(cfg);
    CHECK(data.observations.T() == 300);
    const auto est = estimate(data.observations, Method::pe, {3, 3});
    errors.push_back(aligned_factor_error(est, data.truth));
  }
  CHECK(errors[1] < errors[0]);
  CHECK(errors[2] < errors[1]);
}

}  // TEST_SUITE
