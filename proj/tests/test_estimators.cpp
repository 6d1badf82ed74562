#include <doctest.h>

#include <cmath>

#include "mpca/error.hpp"
#include "mpca/estimators.hpp"
#include "mpca/metrics.hpp"
#include "mpca/sampling.hpp"
#include "oracles.hpp"

using namespace mpca;

namespace {

constexpr Method kAllMethods[] = {Method::mpca_op, Method::mpca_f, Method::pca_2d2, Method::pe};

SimulatedData noiseless(Index p, Index q, Index T, std::uint64_t seed, Index p0 = 3, Index q0 = 3) {
  SimulationConfig cfg;
  cfg.p = p;
  cfg.q = q;
  cfg.p0 = p0;
  cfg.q0 = q0;
  cfg.T = T;
  cfg.phi = cfg.psi = 0.0;
  cfg.s_e = 0.0;
  cfg.seed = seed;
  return gen_dataset(cfg);
}

SimulatedData noisy(Index p, Index q, Index T, std::uint64_t seed, NoiseDistribution d = Gaussian{}) {
  SimulationConfig cfg;
  cfg.p = p;
  cfg.q = q;
  cfg.T = T;
  cfg.dist = d;
  cfg.seed = seed;
  return gen_dataset(cfg);
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

ObservationSet hand_pair() {
  Matrix x1(3, 2);
  x1 << 3, 1, 0, 2, 1, 0;
  Matrix x2(3, 2);
  x2 << 1, 0, 2, 1, 0, 3;
  return ObservationSet({x1, x2});
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("iteration control validation") {
  CHECK_THROWS_AS(validate(IterationControl{0.0, 10}), InputError);
  CHECK_THROWS_AS(validate(IterationControl{1e-6, 0}), InputError);
  CHECK_NOTHROW(validate(IterationControl{}));
}

TEST_CASE("best subspace of a rank-one observation") {
  const Matrix u = column({0.0, 0.6, 0.8});
  const Matrix v = column({-0.6, 0.0, -0.8, 0.0});
  const auto s = best_subspace_op(2.5 * u * v.transpose(), 1);
  CHECK(max_abs(s.row.matrix() - u) <= 1e-12);
  CHECK(max_abs(s.col.matrix() + v) <= 1e-12);
  CHECK_THROWS_AS(best_subspace_op(u * v.transpose(), 4), InputError);
  CHECK_THROWS_AS(best_subspace_op(u * v.transpose(), 0), InputError);
}

TEST_CASE("best subspace lies in the loading span for noiseless data") {
  const auto data = noiseless(10, 8, 4, 1);
  const Matrix pr = oracle::proj(data.truth.r);
  const Matrix pc = oracle::proj(data.truth.c);
  for (Index t = 0; t < 4; ++t) {
    const auto s = best_subspace_op(data.observations[t], 3);
    CHECK(op_norm(s.row.matrix() - pr * s.row.matrix()) <= 1e-9);
    CHECK(op_norm(s.col.matrix() - pc * s.col.matrix()) <= 1e-9);
  }
}

TEST_CASE("best subspace is never beaten by random candidate pairs") {
  const Matrix x = oracle::gaussian(6, 4, 314);
  const auto s = best_subspace_op(x, 2);
  auto loss = [&](const Matrix& r, const Matrix& c) {
    return (x - r * r.transpose() * x * c * c.transpose()).norm();
  };
  const double best = loss(s.row.matrix(), s.col.matrix());
  double worst_gap = -1e300;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const Matrix r = oracle::random_orthonormal(6, 2, 1000 + 2 * i);
    const Matrix c = oracle::random_orthonormal(4, 2, 1001 + 2 * i);
    worst_gap = std::max(worst_gap, best - loss(r, c));
  }
  CHECK(worst_gap <= 1e-9);
}

TEST_CASE("MPCA_op hand example") {
  const auto l = mpca_op(hand_pair(), {1, 1});
  const Matrix r = column({1.0490661426581496, 0.7548438377118641, 1.1531136149559476});
  const Matrix c = column({0.9484257171173968, 1.0490417813940263});
  CHECK(max_abs(l.r_hat - r) <= 1e-9);
  CHECK(max_abs(l.c_hat - c) <= 1e-9);
  CHECK(l.method == Method::mpca_op);
}

TEST_CASE("(2D)^2-PCA hand example") {
  const auto l = pca_2d2(hand_pair(), {2, 1});
  Matrix r(3, 2);
  r << 1.1301560790977259, -0.9851116874375148, 0.9379020679417859, -0.1945812294481611,
      0.9181976627224537, 1.411273576745648;
  CHECK(max_abs(l.r_hat - r) <= 1e-9);
  CHECK(max_abs(l.c_hat - Matrix::Ones(2, 1)) <= 1e-9);
}

TEST_CASE("(2D)^2-PCA equals the Gram-matrix oracle") {
  const auto x = hand_pair();
  const auto l = pca_2d2(x, {2, 1});
  const auto ref = oracle::jacobi_eigen(x[0] * x[0].transpose() + x[1] * x[1].transpose());
  CHECK(oracle::span_distance(l.r_hat, oracle::leading(ref, 2)) <= 1e-9);
}

TEST_CASE("one projected-estimation step by hand") {
  Matrix y1(3, 3);
  y1 << 2, 1, 0, 1, 3, 1, 0, 1, 1;
  Matrix y2(3, 3);
  y2 << 1, 0, 2, 0, 1, 0, 2, 0, 1;
  Matrix y3(3, 3);
  y3 << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  const auto fit = pe_fit(ObservationSet({y1, y2, y3}), {1, 1}, {1e-6, 1});
  const Matrix expected = column({0.9866300216597921, 1.1670289623111756, 0.81523285108397});
  CHECK(max_abs(fit.loadings.r_hat - expected) <= 1e-9);
  CHECK(max_abs(fit.loadings.c_hat - expected) <= 1e-9);
  CHECK(fit.iterations == 1);
}

TEST_CASE("all estimators recover noiseless loadings exactly") {
  const auto data = noiseless(20, 15, 3, 7);
  for (Method m : kAllMethods) {
    const auto fit = estimate(data.observations, m, {3, 3});
    CHECK(space_distance(fit.loadings.r_hat, data.truth.r) <= 1e-8);
    CHECK(space_distance(fit.loadings.c_hat, data.truth.c) <= 1e-8);
    CHECK(normalization_error(fit.loadings) <= 1e-8);
    CHECK(fit.loadings.method == m);
    CHECK(fit.factors.size() == 3);
  }
  const auto f = mpca_f(data.observations, {3, 3});
  CHECK(f.converged);
  CHECK(f.iterations <= 2);
}

TEST_CASE("unequal ranks") {
  const auto data = noiseless(12, 10, 6, 8, 2, 4);
  for (Method m : kAllMethods) {
    const auto fit = estimate(data.observations, m, {2, 4});
    CHECK(fit.loadings.r_hat.cols() == 2);
    CHECK(fit.loadings.c_hat.cols() == 4);
    CHECK(space_distance(fit.loadings.r_hat, data.truth.r) <= 1e-8);
    CHECK(space_distance(fit.loadings.c_hat, data.truth.c) <= 1e-8);
  }
}

TEST_CASE("rank preconditions") {
  const auto data = noiseless(6, 4, 2, 9, 1, 1);
  CHECK_THROWS_AS(mpca_op(data.observations, {5, 1}), InputError);
  CHECK_THROWS_AS(mpca_f(data.observations, {1, 5}), InputError);
  CHECK_THROWS_AS(pca_2d2(data.observations, {0, 1}), InputError);
  CHECK_NOTHROW(pca_2d2(data.observations, {5, 1}));
}

TEST_CASE("normalization invariant on noisy data") {
  const auto data = noisy(20, 20, 40, 3, StudentT{3.0});
  for (Method m : kAllMethods) {
    CHECK(normalization_error(estimate(data.observations, m, {3, 3}).loadings) <= 1e-8);
  }
}

TEST_CASE("estimators are scale equivariant") {
  const auto data = noisy(20, 15, 30, 4);
  const auto scaled = data.observations.scaled(37.5);
  for (Method m : kAllMethods) {
    const auto a = estimate(data.observations, m, {3, 3});
    const auto b = estimate(scaled, m, {3, 3});
    CHECK(max_abs(oracle::proj(a.loadings.r_hat) - oracle::proj(b.loadings.r_hat)) <= 1e-9);
    CHECK(max_abs(oracle::proj(a.loadings.c_hat) - oracle::proj(b.loadings.c_hat)) <= 1e-9);
  }
}

TEST_CASE("the loading metric ignores rotations of the target") {
  const auto data = noisy(20, 20, 40, 5);
  const Matrix q = oracle::random_orthonormal(3, 3, 6);
  for (Method m : kAllMethods) {
    const auto fit = estimate(data.observations, m, {3, 3});
    CHECK(std::abs(space_distance(fit.loadings.r_hat, data.truth.r * q) -
                   space_distance(fit.loadings.r_hat, data.truth.r)) <= 1e-12);
  }
}

TEST_CASE("estimators beat chance on noisy data") {
  const auto data = noisy(30, 30, 90, 6);
  for (Method m : kAllMethods) {
    const auto fit = estimate(data.observations, m, {3, 3});
    CHECK(space_distance(fit.loadings.r_hat, data.truth.r) < 0.3);
  }
}

TEST_CASE("MPCA_F reports non-convergence without failing") {
  const auto data = noisy(20, 20, 30, 7, StudentT{1.0});
  const auto fit = mpca_f(data.observations, {3, 3}, {1e-300, 1});
  CHECK(fit.iterations == 1);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("spectra reuse gives the same fits") {
  const auto data = noisy(16, 12, 20, 8);
  for (Index k : {3, 6}) {
    const auto spectra = kernels::observation_spectra(data.observations, k);
    for (Method m : {Method::mpca_op, Method::mpca_f}) {
      const auto a = estimate(data.observations, m, {3, 2});
      const auto b = estimate(data.observations, spectra, m, {3, 2});
      CHECK(max_abs(oracle::proj(a.loadings.r_hat) - oracle::proj(b.loadings.r_hat)) <= 1e-10);
      CHECK(max_abs(oracle::proj(a.loadings.c_hat) - oracle::proj(b.loadings.c_hat)) <= 1e-10);
    }
  }
}

TEST_CASE("varimax with one column is the identity") {
  const Matrix l = oracle::gaussian(5, 1, 1);
  const auto v = varimax(l);
  CHECK(max_abs(v.rotation - Matrix::Identity(1, 1)) == 0.0);
  CHECK(v.loadings == l);
}

TEST_CASE("varimax keeps simple structure up to permutation and sign") {
  Matrix l = Matrix::Zero(6, 3);
  l(0, 0) = 1.0;
  l(1, 0) = -0.7;
  l(2, 1) = 0.9;
  l(3, 1) = 0.4;
  l(4, 2) = -1.2;
  l(5, 2) = 0.3;
  const auto v = varimax(l);
  CHECK(orthonormality_error(v.rotation) <= 1e-12);
  const Matrix a = v.rotation.cwiseAbs();
  for (Index j = 0; j < 3; ++j) CHECK(a.col(j).maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(v.criterion == doctest::Approx(varimax_criterion(l)).epsilon(1e-12));
}

TEST_CASE("varimax matches the rotation-angle grid") {
  const Matrix l = oracle::gaussian(6, 2, 2718);
  const auto v = varimax(l);
  CHECK(orthonormality_error(v.rotation) <= 1e-12);
  CHECK(max_abs(l * v.rotation - v.loadings) <= 1e-12);
  CHECK(std::abs(v.criterion - oracle::varimax_grid(l)) <= 1e-6);
  CHECK(v.criterion == doctest::Approx(oracle::varimax_value(v.loadings)).epsilon(1e-12));
  CHECK(v.criterion >= varimax_criterion(l));
}

TEST_CASE("varimax criterion never decreases across sweep budgets") {
  const Matrix l = oracle::gaussian(12, 4, 99);
  double previous = varimax_criterion(l);
  for (int sweeps = 1; sweeps <= 6; ++sweeps) {
    const auto v = varimax(l, 1e-8, sweeps);
    CHECK(v.criterion >= previous - 1e-15);
    previous = v.criterion;
  }
}

}  // TEST_SUITE
