#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "roweisposes/geigen.hpp"

using namespace roweisposes;

namespace {

Matrix random_spd(std::mt19937_64& rng, int d, double ridge) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix M(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) M(i, j) = gauss(rng);
  }
  return M * M.transpose() / d + ridge * Matrix::Identity(d, d);
}

Matrix random_symmetric(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix M(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) M(i, j) = gauss(rng);
  }
  return 0.5 * (M + M.transpose());
}

Matrix random_orthogonal(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix M(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) M(i, j) = gauss(rng);
  }
  return Eigen::HouseholderQR<Matrix>(M).householderQ();
}

void check_pencil_invariants(const Matrix& A, const Matrix& B,
                             const GeneralizedEigenResult& res) {
  const int p = static_cast<int>(res.eigenvalues.size());
  for (int k = 0; k < p; ++k) {
    const Vector u = res.eigenvectors.col(k);
    const double lambda = res.eigenvalues[k];
    const double residual = (A * u - lambda * B * u).norm();
    const double scale = A.norm() + std::abs(lambda) * B.norm();
    CHECK(residual <= 1e-8 * scale);
  }
  const Matrix gram =
      res.eigenvectors.transpose() * B * res.eigenvectors;
  CHECK((gram - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-8);
  for (int k = 1; k < p; ++k) {
    CHECK(res.eigenvalues[k] <= res.eigenvalues[k - 1] + 1e-12);
  }
}

}  // namespace

TEST_CASE("centering matrix small cases") {
  CHECK(centering_matrix(1)(0, 0) == doctest::Approx(0.0).epsilon(1e-15));

  const Matrix H2 = centering_matrix(2);
  CHECK(H2(0, 0) == doctest::Approx(0.5));
  CHECK(H2(0, 1) == doctest::Approx(-0.5));
  CHECK(H2(1, 0) == doctest::Approx(-0.5));
  CHECK(H2(1, 1) == doctest::Approx(0.5));

  // n = 3: diagonal 2/3, off-diagonal -1/3, zero row sums; frozen from the
  // materialized-H oracle which also verifies idempotence.
  const Matrix H3 = centering_matrix(3);
  const Matrix ref = oracle::centering(3);
  CHECK((H3 - ref).cwiseAbs().maxCoeff() <= 1e-15);
  for (int i = 0; i < 3; ++i) {
    CHECK(H3(i, i) == doctest::Approx(2.0 / 3.0));
    CHECK(H3.row(i).sum() == doctest::Approx(0.0).epsilon(1e-14));
    for (int j = 0; j < 3; ++j) {
      if (i != j) CHECK(H3(i, j) == doctest::Approx(-1.0 / 3.0));
    }
  }
}

TEST_CASE("centering matrix rejects n = 0") {
  CHECK_THROWS_AS(centering_matrix(0), InvalidDimensionError);
}

TEST_CASE("centering matrix is idempotent up to n = 64") {
  for (int n : {1, 2, 3, 5, 16, 64}) {
    const Matrix H = centering_matrix(n);
    CHECK((H * H - H).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(is_symmetric(H, 1e-15));
  }
}

TEST_CASE("center_columns basic behavior") {
  Matrix X(1, 2);
  X << 1.0, 3.0;
  const Matrix C = center_columns(X);
  CHECK(C(0, 0) == doctest::Approx(-1.0));
  CHECK(C(0, 1) == doctest::Approx(1.0));

  Matrix Y(2, 3);
  Y << 1, 2, 3, 4, 4, 4;
  const Matrix Cy = center_columns(Y);
  Matrix expected(2, 3);
  expected << -1, 0, 1, 0, 0, 0;
  CHECK((Cy - expected).cwiseAbs().maxCoeff() <= 1e-12);

  // centering an already centered matrix changes nothing
  CHECK((center_columns(Cy) - Cy).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("center_columns equals X * H and rejects empty input") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix X(4, 7);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 7; ++j) X(i, j) = gauss(rng);
  }
  const Matrix viaH = X * oracle::centering(7);
  CHECK((center_columns(X) - viaH).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(center_columns(X).rowwise().mean().cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(center_columns(Matrix(0, 0)), InvalidDimensionError);
}

TEST_CASE("regularize shifts the diagonal") {
  const Matrix Z = Matrix::Zero(2, 2);
  const Matrix R = regularize(Z, 1e-6);
  CHECK((R - 1e-6 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(3);
  const Matrix B = random_spd(rng, 4, 0.1);
  CHECK((regularize(B, 0.0) - B).cwiseAbs().maxCoeff() == 0.0);

  // shift a slightly indefinite matrix into factorizable territory
  Eigen::SelfAdjointEigenSolver<Matrix> es(random_spd(rng, 3, 0.0));
  Vector vals = es.eigenvalues();
  vals[0] = -1e-10;
  const Matrix nearly =
      es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
  CHECK_FALSE(try_cholesky(nearly).ok);
  CHECK(try_cholesky(regularize(nearly, 1e-8)).ok);
}

TEST_CASE("solve_generalized_eig with B = I reduces to the symmetric case") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 3.0;
  A(1, 1) = 1.0;
  const auto res = solve_generalized_eig(A, Matrix::Identity(2, 2), 2);
  CHECK(res.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(res.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(std::abs(res.eigenvectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(res.eigenvectors(1, 1)) == doctest::Approx(1.0));

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 6;
    const Matrix S = random_symmetric(rng, d);
    const auto gen = solve_generalized_eig(S, Matrix::Identity(d, d), d);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    for (int k = 0; k < d; ++k) {
      CHECK(gen.eigenvalues[k] ==
            doctest::Approx(es.eigenvalues()[d - 1 - k]).epsilon(1e-10));
      // up to sign for non-degenerate spectra
      const Vector a = gen.eigenvectors.col(k);
      const Vector b = es.eigenvectors().col(d - 1 - k);
      CHECK(std::min((a - b).norm(), (a + b).norm()) <= 1e-8);
    }
  }
}

TEST_CASE("solve_generalized_eig diagonal pencil with degenerate eigenvalues") {
  Matrix A(2, 2), B(2, 2);
  A << 2, 0, 0, 8;
  B << 1, 0, 0, 4;
  // B^{-1} A = diag(2, 2) by hand; both eigenvalues 2.
  const auto res = solve_generalized_eig(A, B, 2);
  CHECK(res.eigenvalues[0] == doctest::Approx(2.0));
  CHECK(res.eigenvalues[1] == doctest::Approx(2.0));
  check_pencil_invariants(A, B, res);
  // declared tie-break: lexicographic after sign canonicalization puts the
  // (0, 1/2) direction first
  CHECK(res.eigenvectors(0, 0) == doctest::Approx(0.0));
  CHECK(res.eigenvectors(1, 0) == doctest::Approx(0.5));
  CHECK(res.eigenvectors(0, 1) == doctest::Approx(1.0));
  CHECK(res.eigenvectors(1, 1) == doctest::Approx(0.0));
  // determinism
  const auto res2 = solve_generalized_eig(A, B, 2);
  CHECK((res.eigenvectors - res2.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_generalized_eig random SPD pairs satisfy the invariants") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = random_symmetric(rng, 6);
    const Matrix B = random_spd(rng, 6, 0.2);
    const auto res = solve_generalized_eig(A, B, 3);
    check_pencil_invariants(A, B, res);

    // against the independent full-spectrum nonsymmetric solve
    const auto ref = oracle::generalized_eig_reference(A, B);
    for (int k = 0; k < 3; ++k) {
      CHECK(res.eigenvalues[k] ==
            doctest::Approx(ref.values[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("eigenvalues are invariant under orthogonal change of basis") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 5;
    const Matrix A = random_symmetric(rng, d);
    const Matrix B = random_spd(rng, d, 0.3);
    const Matrix Q = random_orthogonal(rng, d);
    const auto base = solve_generalized_eig(A, B, d);
    const auto rotated = solve_generalized_eig(Q.transpose() * A * Q,
                                               Q.transpose() * B * Q, d);
    for (int k = 0; k < d; ++k) {
      const double scale = std::max(1.0, std::abs(base.eigenvalues[k]));
      CHECK(std::abs(base.eigenvalues[k] - rotated.eigenvalues[k]) <=
            1e-9 * scale);
    }
  }
}

TEST_CASE("solve_generalized_eig rejects bad inputs") {
  const Matrix I2 = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(solve_generalized_eig(I2, Matrix::Identity(3, 3), 1),
                  InvalidDimensionError);
  CHECK_THROWS_AS(solve_generalized_eig(I2, I2, 0), InvalidDimensionError);
  CHECK_THROWS_AS(solve_generalized_eig(I2, I2, 3), InvalidDimensionError);

  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  try {
    solve_generalized_eig(I2, indefinite, 1);
    FAIL("expected IndefiniteConstraintError");
  } catch (const IndefiniteConstraintError& e) {
    CHECK(e.smallest_pivot() == doctest::Approx(-1.0));
    CHECK(std::string(e.what()).find("pivot") != std::string::npos);
  }
}

TEST_CASE("try_cholesky reports the smallest pivot") {
  std::mt19937_64 rng(31);
  const Matrix B = random_spd(rng, 5, 0.5);
  const auto res = try_cholesky(B);
  REQUIRE(res.ok);
  CHECK((res.lower * res.lower.transpose() - B).cwiseAbs().maxCoeff() <=
        1e-12 * B.cwiseAbs().maxCoeff());
  CHECK(res.smallest_pivot > 0.0);
}
