#include "roweisposes/geigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace roweisposes {

namespace {

// Relative gap below which neighboring eigenvalues are treated as one
// degenerate cluster.
constexpr double kClusterGap = 1e-10;

Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

// Copy of a column with its first significant entry made positive. Used only
// as a comparison key when ordering columns inside a degenerate cluster.
Vector canonical_for_compare(const Vector& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale <= 0.0) return v;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) > 1e-12 * scale) {
      return v[k] < 0.0 ? Vector(-v) : v;
    }
  }
  return v;
}

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

// Reorders columns inside each numerically equal eigenvalue cluster so the
// output does not depend on internal solver details.
void order_degenerate_clusters(Vector& vals, Matrix& vecs) {
  const int p = static_cast<int>(vals.size());
  int start = 0;
  for (int i = 1; i <= p; ++i) {
    bool boundary = (i == p);
    if (!boundary) {
      const double gap = std::abs(vals[i - 1] - vals[i]);
      boundary = gap > kClusterGap *
                           std::max(std::abs(vals[i - 1]), std::abs(vals[i]));
    }
    if (boundary) {
      if (i - start > 1) {
        std::vector<int> idx(i - start);
        std::iota(idx.begin(), idx.end(), start);
        std::vector<Vector> keys;
        keys.reserve(idx.size());
        for (int k : idx) keys.push_back(canonical_for_compare(vecs.col(k)));
        std::vector<int> order(idx.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return lex_less(keys[a], keys[b]);
        });
        Matrix cols(vecs.rows(), idx.size());
        Vector vv(idx.size());
        for (size_t k = 0; k < order.size(); ++k) {
          cols.col(k) = vecs.col(idx[order[k]]);
          vv[k] = vals[idx[order[k]]];
        }
        vecs.middleCols(start, idx.size()) = cols;
        vals.segment(start, idx.size()) = vv;
      }
      start = i;
    }
  }
}

// Flips each column so its largest-magnitude entry (first such index on
// ties) is positive.
void fix_signs(Matrix& vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    Eigen::Index best = 0;
    double mag = std::abs(vecs(0, c));
    for (Eigen::Index r = 1; r < vecs.rows(); ++r) {
      const double m = std::abs(vecs(r, c));
      if (m > mag) {
        mag = m;
        best = r;
      }
    }
    if (vecs(best, c) < 0.0) vecs.col(c) = -vecs.col(c);
  }
}

}  // namespace

Matrix centering_matrix(int n) {
  if (n < 1) throw InvalidDimensionError("centering_matrix: n must be >= 1");
  Matrix H = Matrix::Identity(n, n);
  H.array() -= 1.0 / static_cast<double>(n);
  return H;
}

Matrix center_columns(const Matrix& X) {
  if (X.rows() == 0 || X.cols() == 0) {
    throw InvalidDimensionError("center_columns: matrix must be non-empty");
  }
  return X.colwise() - X.rowwise().mean();
}

CholeskyResult try_cholesky(const Matrix& B) {
  const Eigen::Index d = B.rows();
  CholeskyResult res;
  res.lower = Matrix::Zero(d, d);
  res.smallest_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = B(j, j) - res.lower.row(j).head(j).squaredNorm();
    res.smallest_pivot = std::min(res.smallest_pivot, pivot);
    if (!(pivot > 0.0)) {
      res.ok = false;
      return res;
    }
    const double ljj = std::sqrt(pivot);
    res.lower(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      res.lower(i, j) =
          (B(i, j) - res.lower.row(i).head(j).dot(res.lower.row(j).head(j))) /
          ljj;
    }
  }
  res.ok = true;
  return res;
}

Matrix regularize(const Matrix& B, double eps) {
  if (eps < 0.0) throw ConfigError("regularize: eps must be nonnegative");
  return B + eps * Matrix::Identity(B.rows(), B.cols());
}

GeneralizedEigenResult solve_generalized_eig(const Matrix& A, const Matrix& B,
                                             int p) {
  const Eigen::Index d = A.rows();
  if (d < 1 || A.cols() != d || B.rows() != d || B.cols() != d) {
    throw InvalidDimensionError(
        "solve_generalized_eig: A and B must be square with equal dimension");
  }
  if (p < 1 || p > d) {
    throw InvalidDimensionError(
        "solve_generalized_eig: p must satisfy 1 <= p <= d");
  }

  const Matrix As = symmetrized(A);
  const CholeskyResult chol = try_cholesky(symmetrized(B));
  if (!chol.ok) {
    std::ostringstream msg;
    msg << "solve_generalized_eig: constraint matrix is not positive "
           "definite (smallest pivot "
        << chol.smallest_pivot << ")";
    throw IndefiniteConstraintError(msg.str(), chol.smallest_pivot);
  }

  const auto L = chol.lower.triangularView<Eigen::Lower>();
  const Matrix W = L.solve(As);
  Matrix C = L.solve(W.transpose());  // (L^{-1} A L^{-T})^T, symmetric
  C = symmetrized(C);

  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  if (es.info() != Eigen::Success) {
    throw Error("solve_generalized_eig: symmetric eigensolver failed");
  }

  GeneralizedEigenResult out;
  out.eigenvalues = Vector(p);
  Matrix V(d, p);
  for (int k = 0; k < p; ++k) {
    out.eigenvalues[k] = es.eigenvalues()[d - 1 - k];
    V.col(k) = es.eigenvectors().col(d - 1 - k);
  }
  out.eigenvectors =
      chol.lower.transpose().triangularView<Eigen::Upper>().solve(V);

  order_degenerate_clusters(out.eigenvalues, out.eigenvectors);
  fix_signs(out.eigenvectors);
  return out;
}

bool is_symmetric(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) return false;
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace roweisposes
