#include <doctest.h>

#include <cmath>

#include "mpca/error.hpp"
#include "mpca/linalg.hpp"
#include "mpca/metrics.hpp"
#include "oracles.hpp"

using namespace mpca;

namespace {

Matrix random_symmetric(int n, std::uint64_t seed) {
  const Matrix a = oracle::gaussian(n, n, seed);
  return 0.5 * (a + a.transpose());
}

void check_sign_rule(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(m(arg, j) >= 0.0);
  }
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("top_eigvecs on a diagonal matrix") {
  const Matrix m = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
  const auto e = top_eigvecs(m, 2);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
  CHECK(e.values(2) == doctest::Approx(1.0));
  CHECK(max_abs(e.vectors.matrix() - Matrix::Identity(3, 2)) < 1e-14);
}

TEST_CASE("top_eigvecs on a 2x2 analytic case") {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  const auto e = top_eigvecs(m, 1);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.vectors.matrix()(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(e.vectors.matrix()(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("top_eigvecs agrees with the Jacobi oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix m = random_symmetric(6, seed);
    const auto e = top_eigvecs(m, 3);
    const auto ref = oracle::jacobi_eigen(m);
    CHECK(space_distance(e.vectors.matrix(), oracle::leading(ref, 3)) <= 1e-9);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(e.values(i) - ref.values(i)) < 1e-10);
  }
}

TEST_CASE("eigenpair residuals, ordering and sign rule") {
  for (int n : {2, 5, 17, 40}) {
    const Matrix m = random_symmetric(n, 100 + static_cast<std::uint64_t>(n));
    const auto e = top_eigvecs(m, n);
    const double scale = op_norm(m);
    for (int i = 0; i < n; ++i) {
      const Vector v = e.vectors.matrix().col(i);
      CHECK((m * v - e.values(i) * v).norm() <= 1e-9 * scale);
      if (i > 0) CHECK(e.values(i) <= e.values(i - 1));
    }
    check_sign_rule(e.vectors.matrix());
    CHECK(orthonormality_error(e.vectors.matrix()) <= 1e-10);
  }
}

TEST_CASE("top_eigvecs errors") {
  const Matrix m = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(top_eigvecs(m, 4), DimensionError);
  Matrix bad = m;
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(top_eigvecs(bad, 1), InputError);
}

TEST_CASE("decompositions are deterministic") {
  const Matrix m = random_symmetric(12, 9);
  const auto a = top_eigvecs(m, 4);
  const auto b = top_eigvecs(m, 4);
  CHECK(a.vectors.matrix() == b.vectors.matrix());
  const Matrix x = oracle::gaussian(9, 7, 10);
  const auto s1 = top_singvecs(x, 3, Side::both);
  const auto s2 = top_singvecs(x, 3, Side::both);
  CHECK(s1.left->matrix() == s2.left->matrix());
  CHECK(s1.right->matrix() == s2.right->matrix());
}

TEST_CASE("projector of top eigenvectors depends only on the eigenspace") {
  const Matrix q = oracle::random_orthonormal(8, 8, 21);
  Vector lambda(8);
  lambda << 9, 9, 9, 4, 3, 2, 1, 0.5;
  const Matrix p_ref = projector(top_eigvecs(q * lambda.asDiagonal() * q.transpose(), 3).vectors);
  for (std::uint64_t seed = 30; seed < 35; ++seed) {
    Matrix q2 = q;
    q2.leftCols(3) = q.leftCols(3) * oracle::random_orthonormal(3, 3, seed);
    const Matrix m = q2 * lambda.asDiagonal() * q2.transpose();
    CHECK(max_abs(projector(top_eigvecs(m, 3).vectors) - p_ref) <= 1e-9);
  }
}

TEST_CASE("top_singvecs of a rank-one matrix") {
  Vector u(3);
  u << 0.6, -0.8, 0.0;
  Vector v(2);
  v << -1.0, 0.0;
  const auto s = top_singvecs(u * v.transpose(), 1, Side::both);
  CHECK(s.values(0) == doctest::Approx(1.0));
  CHECK(s.left->matrix()(1, 0) == doctest::Approx(0.8));
  CHECK(s.left->matrix()(0, 0) == doctest::Approx(-0.6));
  CHECK(std::abs(s.right->matrix()(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("top_singvecs of an embedded diagonal") {
  Matrix m = Matrix::Zero(3, 2);
  m(0, 0) = 5;
  m(1, 1) = 3;
  const auto s = top_singvecs(m, 1, Side::both);
  CHECK(s.values(0) == doctest::Approx(5.0));
  CHECK(s.values(1) == doctest::Approx(3.0));
  CHECK(s.left->matrix()(0, 0) == doctest::Approx(1.0));
  CHECK(s.right->matrix()(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(top_singvecs(m, 3, Side::left), DimensionError);
  CHECK_THROWS_AS(top_singvecs(m, 0, Side::left), DimensionError);
}

TEST_CASE("top_singvecs matches the Gram-matrix oracle") {
  const Matrix m = oracle::gaussian(8, 5, 42);
  const auto s = top_singvecs(m, 2, Side::both);
  CHECK(space_distance(s.left->matrix(), oracle::leading(oracle::jacobi_eigen(m * m.transpose()), 2)) <= 1e-9);
  CHECK(space_distance(s.right->matrix(), oracle::leading(oracle::jacobi_eigen(m.transpose() * m), 2)) <= 1e-9);
  const auto ref = oracle::jacobi_eigen(m.transpose() * m);
  for (int i = 0; i < 5; ++i) CHECK(s.values(i) == doctest::Approx(std::sqrt(std::max(0.0, ref.values(i)))));
}

TEST_CASE("top_singvecs left side equals Gram eigenvectors up to 50x50") {
  std::uint64_t seed = 200;
  for (int n : {3, 10, 25, 50}) {
    for (int m : {2, 7, 50}) {
      const Matrix x = oracle::gaussian(n, m, ++seed);
      const Index k = std::min<Index>(3, std::min(n, m) - 1);
      const auto s = top_singvecs(x, k, Side::left);
      const auto e = top_eigvecs(x * x.transpose(), k);
      CHECK(space_distance(s.left->matrix(), e.vectors.matrix()) <= 1e-9);
      for (Index i = 1; i < s.values.size(); ++i) CHECK(s.values(i) <= s.values(i - 1));
      CHECK(s.values.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("projector examples and properties") {
  Matrix e1 = Matrix::Zero(2, 1);
  e1(0, 0) = 1;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1;
  CHECK(projector(e1) == expected);
  CHECK(projector(OrthonormalBasis::identity(4)) == Matrix::Identity(4, 4));

  const auto b = OrthonormalBasis::orthonormalize(oracle::gaussian(7, 3, 5));
  const Matrix p = projector(b);
  CHECK(max_abs(p * p - p) <= 1e-10);
  CHECK(max_abs(p - p.transpose()) == 0.0);
  CHECK(std::abs(p.trace() - 3.0) <= 1e-10);

  CHECK_THROWS_AS(projector(oracle::gaussian(4, 2, 6)), ContractError);
  CHECK_THROWS_AS(OrthonormalBasis::from_columns(2.0 * Matrix::Identity(3, 2)), ContractError);
}

TEST_CASE("projector idempotence on random bases") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);
    const int k = 1 + static_cast<int>(seed % n);
    const Matrix p = projector(OrthonormalBasis::orthonormalize(oracle::gaussian(n, k, seed)));
    CHECK(max_abs(p * p - p) <= 1e-10);
    CHECK(std::abs(p.trace() - k) <= 1e-10);
  }
}

TEST_CASE("procrustes_align examples") {
  const Matrix a = oracle::gaussian(6, 3, 11);
  CHECK(max_abs(procrustes_align(a, a) - Matrix::Identity(3, 3)) <= 1e-12);
  for (std::uint64_t seed = 12; seed < 17; ++seed) {
    const Matrix q = oracle::random_orthonormal(3, 3, seed);
    const Matrix h = procrustes_align(a, a * q);
    CHECK(max_abs(h - q) <= 1e-10);
    CHECK(orthonormality_error(h) <= 1e-12);
  }
  Matrix deficient = Matrix::Zero(4, 2);
  deficient(0, 0) = 1;
  deficient(1, 0) = 1;
  CHECK_THROWS_AS(procrustes_align(deficient, oracle::gaussian(4, 2, 1)), DegenerateError);
}

TEST_CASE("procrustes_align matches the angle-grid oracle") {
  const Matrix a = oracle::gaussian(5, 2, 77);
  const Matrix b = oracle::gaussian(5, 2, 78);
  const Matrix h = procrustes_align(a, b);
  const double value = (b - a * h).norm();
  CHECK(std::abs(value - oracle::procrustes_grid(a, b)) <= 1e-6);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix q = oracle::random_orthonormal(2, 2, 500 + seed);
    CHECK(value <= (b - a * q).norm() + 1e-12);
  }
}

TEST_CASE("sign convention") {
  Matrix m(3, 2);
  m << 0.1, 0.5, -0.9, -0.5, 0.2, 0.1;
  apply_sign_convention(m);
  CHECK(m(1, 0) == doctest::Approx(0.9));
  // Ties resolve to the first entry of largest magnitude.
  CHECK(m(0, 1) == doctest::Approx(0.5));
  CHECK(m(1, 1) == doctest::Approx(-0.5));
}

}  // TEST_SUITE
