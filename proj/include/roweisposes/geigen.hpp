#pragma once

#include <Eigen/Dense>

#include "roweisposes/errors.hpp"

namespace roweisposes {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Top-p solution of the symmetric-definite pencil A u = lambda B u.
//
// Eigenvalues are sorted non-increasing and the eigenvector columns are
// B-orthonormal: U^T B U = I. Output is deterministic: inside a numerically
// degenerate eigenvalue cluster columns are ordered lexicographically (after
// making the first significant entry positive), and every returned column is
// flipped so its largest-magnitude entry is positive.
struct GeneralizedEigenResult {
  Vector eigenvalues;   // length p, non-increasing
  Matrix eigenvectors;  // d x p, columns B-orthonormal
};

// Outcome of an attempted lower Cholesky factorization B = L L^T.
// `smallest_pivot` is the smallest diagonal pivot seen, including the one
// that failed when `ok` is false.
struct CholeskyResult {
  bool ok = false;
  Matrix lower;
  double smallest_pivot = 0.0;
};

// I - (1/n) * 1 * 1^T. Symmetric and idempotent.
Matrix centering_matrix(int n);

// Subtracts the mean of each row, i.e. computes X * H without materializing
// the centering matrix. Columns are samples.
Matrix center_columns(const Matrix& X);

// Lower Cholesky with pivot tracking; never throws, reports failure in-band.
CholeskyResult try_cholesky(const Matrix& B);

// B + eps * I.
Matrix regularize(const Matrix& B, double eps);

// Solves A u = lambda B u for the top-p eigenpairs. B must be symmetric
// positive definite; A symmetric. The pencil is reduced through B = L L^T to
// a standard symmetric problem on L^{-1} A L^{-T} and back-transformed, which
// keeps B-orthonormality exact by construction.
//
// Throws InvalidDimensionError on size violations and
// IndefiniteConstraintError (naming the smallest pivot) when B is not
// positive definite.
GeneralizedEigenResult solve_generalized_eig(const Matrix& A, const Matrix& B,
                                             int p);

bool is_symmetric(const Matrix& M, double tol = 1e-12);

}  // namespace roweisposes
