#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pdpp/error.hpp"
#include "pdpp/matrix.hpp"
#include "pdpp/rng.hpp"

using namespace pdpp;

namespace {

SymMatrix random_spd(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = uniform01(rng) - 0.5;
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < n; ++m) s += b(i, m) * b(j, m);
      a.set(i, j, s + (i == j ? 0.1 : 0.0));
    }
  return a;
}

// Leibniz-free determinant by Gaussian elimination with partial pivoting.
double det_gauss(const SymMatrix& s) {
  const std::size_t n = s.dim();
  DenseMatrix a = s.to_dense();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

}  // namespace

TEST_CASE("eigenvalues of identity, diagonal and 2x2 examples") {
  auto e = sym_eigendecompose(SymMatrix::identity(3));
  REQUIRE(e.values.size() == 3);
  for (double v : e.values) CHECK(v == doctest::Approx(1.0));

  std::vector<double> d{2.0, 5.0};
  auto v = sym_eigenvalues(SymMatrix::diagonal(d));
  CHECK(v[0] == doctest::Approx(2.0));
  CHECK(v[1] == doctest::Approx(5.0));

  // Characteristic polynomial (2 - x)^2 - 1 = 0.
  auto w = sym_eigenvalues(SymMatrix::from_rows({{2, 1}, {1, 2}}));
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("eigendecomposition reconstructs A and has orthonormal vectors") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 3 + seed * 4;
    SymMatrix a = random_spd(n, seed);
    auto e = sym_eigendecompose(a);
    for (std::size_t j = 1; j < n; ++j) CHECK(e.values[j - 1] <= e.values[j]);
    double trace = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      trace += a(i, i);
      sum += e.values[i];
      for (std::size_t j = 0; j < n; ++j) {
        double rec = 0.0, ortho = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
          rec += e.vectors(i, m) * e.values[m] * e.vectors(j, m);
          ortho += e.vectors(m, i) * e.vectors(m, j);
        }
        CHECK(std::abs(rec - a(i, j)) < 1e-10);
        CHECK(std::abs(ortho - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
    }
    CHECK(sum == doctest::Approx(trace).epsilon(1e-12));
  }
}

TEST_CASE("Jacobi reports non-convergence with the sweep count") {
  SymMatrix a = random_spd(12, 3);
  try {
    sym_eigendecompose(a, {.max_sweeps = 1, .compute_vectors = false});
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.iterations() == 1);
  }
}

TEST_CASE("log_det examples") {
  CHECK(log_det(SymMatrix::identity(4)) == doctest::Approx(0.0));
  const double e = std::numbers::e;
  std::vector<double> d{e, e};
  CHECK(log_det(SymMatrix::diagonal(d)) == doctest::Approx(2.0));
  // det = 4*3 - 2*2 = 8
  CHECK(log_det(SymMatrix::from_rows({{4, 2}, {2, 3}})) == doctest::Approx(std::log(8.0)));
}

TEST_CASE("log_det matches Gaussian elimination on random SPD matrices") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    SymMatrix a = random_spd(6, seed);
    CHECK(log_det(a) == doctest::Approx(std::log(det_gauss(a))).epsilon(1e-10));
  }
}

TEST_CASE("cholesky factor reproduces A and rejects indefinite input") {
  SymMatrix a = random_spd(5, 42);
  DenseMatrix g = cholesky(a);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < 5; ++m) s += g(i, m) * g(j, m);
      CHECK(std::abs(s - a(i, j)) < 1e-12);
      if (j > i) CHECK(g(i, j) == 0.0);
    }
  try {
    log_det(SymMatrix::from_rows({{1, 2}, {2, 1}}));
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("is_psd examples") {
  CHECK(is_psd(SymMatrix::identity(2), 0.0));
  CHECK_FALSE(is_psd(SymMatrix::from_rows({{1, 2}, {2, 1}}), 1e-9));  // eigenvalues -1, 3
  CHECK(is_psd(SymMatrix::from_rows({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), 1e-9));
  CHECK(is_psd(SymMatrix::diagonal(std::vector<double>{1.0, -1e-10}), 1e-9));
  CHECK_FALSE(is_psd(SymMatrix::diagonal(std::vector<double>{1.0, -1e-8}), 1e-9));
}

TEST_CASE("is_psd agrees with the smallest eigenvalue") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (double target : {-1e-3, -1e-7, 1e-7, 1e-3}) {
      SymMatrix a = random_spd(7, seed);
      const double lmin = sym_eigenvalues(a)[0];
      a.add_to_diagonal(std::vector<double>(7, target - lmin));
      CHECK(is_psd(a, 1e-9) == (target > 0));
    }
  }
}

TEST_CASE("project_psd clips negative eigenvalues") {
  SymMatrix p = project_psd(SymMatrix::from_rows({{1, 2}, {2, 1}}));
  auto v = sym_eigenvalues(p);
  CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(3.0));
  CHECK(p(0, 1) == doctest::Approx(1.5));
}

TEST_CASE("SymMatrix construction and helpers") {
  DenseMatrix d(2, 2);
  d(0, 1) = 2.0;
  d(1, 0) = 4.0;
  SymMatrix s = SymMatrix::from_dense(d);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
  CHECK_THROWS_AS(SymMatrix::from_dense(DenseMatrix(2, 3)), InvalidInput);
  CHECK_THROWS_AS(SymMatrix::from_rows({{1, std::nan("")}, {0, 1}}), InvalidInput);

  SymMatrix a = random_spd(4, 1);
  std::vector<std::size_t> idx{2, 0};
  SymMatrix sub = a.principal(idx);
  CHECK(sub(0, 0) == a(2, 2));
  CHECK(sub(0, 1) == a(2, 0));
  std::vector<std::size_t> perm{3, 2, 1, 0};
  SymMatrix p = a.permuted(perm);
  CHECK(log_det(p) == doctest::Approx(log_det(a)));
  CHECK(a.scaled(2.0)(1, 2) == 2.0 * a(1, 2));
}
