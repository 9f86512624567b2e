#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "eigen_support.hpp"
#include "gclab/matrix.hpp"
#include "gclab/rng.hpp"

using namespace gclab;
using testsupport::to_eigen;

namespace {
DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  SeededRng rng(seed);
  return gaussian_matrix(r, c, 1.0, rng);
}
}  // namespace

TEST_CASE("matmul matches a hand-computed product and rejects mismatches") {
  const DenseMatrix a = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  const DenseMatrix b = DenseMatrix::from_rows({{7, 8}, {9, 10}, {11, 12}});
  const DenseMatrix c = matmul(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 2);
  CHECK(c(0, 0) == doctest::Approx(58).epsilon(1e-15));
  CHECK(c(0, 1) == doctest::Approx(64).epsilon(1e-15));
  CHECK(c(1, 0) == doctest::Approx(139).epsilon(1e-15));
  CHECK(c(1, 1) == doctest::Approx(154).epsilon(1e-15));
  CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
}

TEST_CASE("matmul and transpose agree with the dense oracle") {
  const DenseMatrix a = random_matrix(17, 9, 1);
  const DenseMatrix b = random_matrix(9, 13, 2);
  const Eigen::MatrixXd oracle = to_eigen(a) * to_eigen(b);
  const DenseMatrix got = matmul(a, b);
  for (std::size_t i = 0; i < got.rows(); ++i)
    for (std::size_t j = 0; j < got.cols(); ++j)
      CHECK(got(i, j) == doctest::Approx(oracle(i, j)).epsilon(1e-12));
  const DenseMatrix at = transpose(a);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) CHECK(at(j, i) == a(i, j));
}

TEST_CASE("elementwise kernels") {
  const DenseMatrix a = DenseMatrix::from_rows({{1, -2}, {3, 0}});
  const DenseMatrix b = DenseMatrix::from_rows({{2, 5}, {-1, 4}});
  const DenseMatrix s = add(a, b);
  CHECK(s(0, 1) == 3);
  const DenseMatrix d = subtract(a, b);
  CHECK(d(1, 0) == 4);
  const DenseMatrix sc = scale(a, -2.0);
  CHECK(sc(0, 0) == -2);
  const DenseMatrix h = hadamard(a, b);
  CHECK(h(0, 1) == -10);
  CHECK(dot(a, b) == doctest::Approx(2 - 10 - 3 + 0).epsilon(1e-15));
  DenseMatrix acc = a;
  axpy(acc, 2.0, b);
  CHECK(acc(1, 1) == 8);

  const DenseMatrix r = relu(a);
  CHECK(r(0, 1) == 0);
  CHECK(r(1, 0) == 3);
  const DenseMatrix m = relu_mask(a);
  CHECK(m(0, 0) == 1);
  CHECK(m(0, 1) == 0);
  CHECK(m(1, 1) == 0);  // exactly zero stays inactive
}

TEST_CASE("scalar and matrix sigmoid are stable at extremes") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigmoid(1000.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sigmoid(-1000.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::isfinite(sigmoid(-1000.0)));
  const DenseMatrix z = DenseMatrix::from_rows({{0.0, -700.0, 700.0}});
  const DenseMatrix s = sigmoid(z);
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(0, 1) >= 0.0);
  CHECK(s(0, 2) <= 1.0);
}

TEST_CASE("norms") {
  const DenseMatrix a = DenseMatrix::from_rows({{3, 4}});
  CHECK(frobenius_norm(a) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(max_abs(DenseMatrix::from_rows({{1, -7}, {2, 3}})) == 7.0);
  CHECK(row_norm_max(DenseMatrix::from_rows({{3, 4}, {1, 1}})) ==
        doctest::Approx(5.0));
  CHECK_FALSE(has_non_finite(a));
  DenseMatrix nanm = a;
  nanm(0, 0) = std::nan("");
  CHECK(has_non_finite(nanm));
}

TEST_CASE("spectral norm matches the SVD oracle") {
  const DenseMatrix diag = DenseMatrix::from_rows({{3, 0}, {0, 1}});
  CHECK(spectral_norm(diag).value == doctest::Approx(3.0).epsilon(1e-10));

  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const DenseMatrix m = random_matrix(12, 7, seed);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    const SpectralNormResult r = spectral_norm(m);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
  }

  const SpectralNormResult z = spectral_norm(DenseMatrix(4, 4));
  CHECK(z.value == 0.0);
  CHECK(z.converged);
}

TEST_CASE("symmetric eigenvalues match the dense oracle and validate input") {
  const DenseMatrix m2 = DenseMatrix::from_rows({{2, 1}, {1, 2}});
  const auto ev2 = symmetric_eigenvalues(m2);
  CHECK(ev2[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev2[1] == doctest::Approx(3.0).epsilon(1e-12));

  for (std::uint64_t seed = 21; seed < 25; ++seed) {
    const DenseMatrix g = random_matrix(10, 10, seed);
    DenseMatrix sym(10, 10);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = 0; j < 10; ++j)
        sym(i, j) = 0.5 * (g(i, j) + g(j, i));
    const auto got = symmetric_eigenvalues(sym);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(sym));
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(got[i] ==
            doctest::Approx(es.eigenvalues()(static_cast<Eigen::Index>(i)))
                .epsilon(1e-9));
  }

  CHECK_THROWS_AS(symmetric_eigenvalues(random_matrix(3, 4, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(symmetric_eigenvalues(random_matrix(4, 4, 1)),
                  std::invalid_argument);  // asymmetric
}

TEST_CASE("smallest singular value matches the SVD oracle on both shapes") {
  for (std::uint64_t seed = 31; seed < 35; ++seed) {
    const DenseMatrix tall = random_matrix(9, 5, seed);
    const DenseMatrix wide = random_matrix(5, 9, seed + 100);
    Eigen::JacobiSVD<Eigen::MatrixXd> st(to_eigen(tall));
    Eigen::JacobiSVD<Eigen::MatrixXd> sw(to_eigen(wide));
    CHECK(smallest_singular_value(tall) ==
          doctest::Approx(st.singularValues().tail(1)(0)).epsilon(1e-8));
    CHECK(smallest_singular_value(wide) ==
          doctest::Approx(sw.singularValues().tail(1)(0)).epsilon(1e-8));
  }
}

TEST_CASE("solve_linear matches the oracle and flags singular systems") {
  const DenseMatrix a = random_matrix(8, 8, 77);
  const DenseMatrix b = random_matrix(8, 3, 78);
  const DenseMatrix x = solve_linear(a, b);
  const Eigen::MatrixXd oracle =
      to_eigen(a).partialPivLu().solve(to_eigen(b));
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(x(i, j) == doctest::Approx(oracle(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j)))
                           .epsilon(1e-9));
  // Residual check: A x == b.
  const DenseMatrix res = subtract(matmul(a, x), b);
  CHECK(frobenius_norm(res) < 1e-10 * frobenius_norm(b));

  DenseMatrix singular(3, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    singular(0, j) = 1.0;
    singular(1, j) = 2.0;  // row 1 = 2 * row 0
    singular(2, j) = static_cast<double>(j);
  }
  CHECK_THROWS_AS(solve_linear(singular, DenseMatrix(3, 1)),
                  std::domain_error);
  CHECK_THROWS_AS(solve_linear(random_matrix(3, 4, 1), DenseMatrix(3, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_linear(random_matrix(3, 3, 1), DenseMatrix(4, 1)),
                  std::invalid_argument);
}

TEST_CASE("csv round trip preserves doubles bit-for-bit") {
  DenseMatrix m = DenseMatrix::from_rows(
      {{0.1, -2.5e-17, 3.0}, {1e300, -7.25, 0.0}});
  std::stringstream ss;
  dump_csv(m, ss);
  const DenseMatrix back = load_csv(ss);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) CHECK(back(i, j) == m(i, j));
}

TEST_CASE("gaussian_matrix is seed-deterministic") {
  SeededRng r1(5), r2(5);
  const DenseMatrix a = gaussian_matrix(4, 3, 2.0, r1);
  const DenseMatrix b = gaussian_matrix(4, 3, 2.0, r2);
  CHECK(a == b);
}
