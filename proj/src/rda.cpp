#include "roweisposes/rda.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace roweisposes {

namespace {

// Maps each sample to the index of its label in the sorted alphabet.
std::vector<int> class_indices(const std::vector<std::string>& labels,
                               const std::vector<std::string>& alphabet) {
  std::map<std::string, int> index;
  for (size_t j = 0; j < alphabet.size(); ++j) {
    index[alphabet[j]] = static_cast<int>(j);
  }
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    out[i] = index.at(labels[i]);
  }
  return out;
}

struct ClassStats {
  std::vector<std::string> alphabet;
  std::vector<int> idx;     // per-sample class index
  std::vector<int> counts;  // per-class sample count
  Matrix class_means;       // d x c
  Vector mean;              // d
};

ClassStats class_stats(const LabeledMatrix& data) {
  ClassStats st;
  st.alphabet = sorted_unique_labels(data.labels);
  st.idx = class_indices(data.labels, st.alphabet);
  const int c = static_cast<int>(st.alphabet.size());
  st.counts.assign(c, 0);
  st.class_means = Matrix::Zero(data.X.rows(), c);
  for (Eigen::Index i = 0; i < data.X.cols(); ++i) {
    st.class_means.col(st.idx[i]) += data.X.col(i);
    ++st.counts[st.idx[i]];
  }
  for (int j = 0; j < c; ++j) {
    st.class_means.col(j) /= static_cast<double>(st.counts[j]);
  }
  st.mean = data.X.rowwise().mean();
  return st;
}

}  // namespace

void LabeledMatrix::validate() const {
  if (X.rows() < 1 || X.cols() < 2) {
    throw InvalidDimensionError(
        "LabeledMatrix: X must have at least 1 row and 2 columns");
  }
  if (static_cast<Eigen::Index>(labels.size()) != X.cols()) {
    throw DataError("LabeledMatrix: one label per column required");
  }
}

void RoweisFactors::validate() const {
  if (!(r1 >= 0.0 && r1 <= 1.0 && r2 >= 0.0 && r2 <= 1.0)) {
    std::ostringstream msg;
    msg << "Roweis factors (" << r1 << ", " << r2
        << ") must lie in the closed unit square";
    throw ConfigError(msg.str());
  }
}

KernelKind kernel_from_string(const std::string& name) {
  if (name == "delta") return KernelKind::Delta;
  if (name == "linear") return KernelKind::Linear;
  if (name == "rbf") return KernelKind::Rbf;
  throw ConfigError("unknown label kernel '" + name +
                    "' (expected delta, linear or rbf)");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Delta:
      return "delta";
    case KernelKind::Linear:
      return "linear";
    case KernelKind::Rbf:
    default:
      return "rbf";
  }
}

std::vector<std::string> sorted_unique_labels(
    const std::vector<std::string>& labels) {
  std::set<std::string> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

Matrix between_scatter(const LabeledMatrix& data) {
  data.validate();
  const ClassStats st = class_stats(data);
  const Eigen::Index d = data.X.rows();
  Matrix S = Matrix::Zero(d, d);
  for (size_t j = 0; j < st.alphabet.size(); ++j) {
    const Vector diff = st.class_means.col(j) - st.mean;
    S.noalias() += static_cast<double>(st.counts[j]) * diff * diff.transpose();
  }
  return S;
}

Matrix within_scatter(const LabeledMatrix& data) {
  data.validate();
  const ClassStats st = class_stats(data);
  const Eigen::Index d = data.X.rows();
  Matrix S = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < data.X.cols(); ++i) {
    const Vector diff = data.X.col(i) - st.class_means.col(st.idx[i]);
    S.noalias() += diff * diff.transpose();
  }
  return S;
}

Matrix total_scatter(const LabeledMatrix& data) {
  data.validate();
  const Matrix Xc = center_columns(data.X);
  return Xc * Xc.transpose();
}

LabelKernel label_kernel(const std::vector<std::string>& labels,
                         KernelKind kind, double gamma) {
  if (labels.empty()) throw DataError("label_kernel: labels must be non-empty");
  if (kind == KernelKind::Rbf && !(gamma > 0.0)) {
    throw ConfigError("label_kernel: rbf gamma must be positive");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  LabelKernel out;
  out.kind = kind;
  out.gamma = gamma;
  out.K = Matrix(n, n);
  // One-hot encodings give ||e_a - e_b||^2 = 0 for equal labels and 2
  // otherwise, so all three kernels depend only on label equality.
  const double off = kind == KernelKind::Rbf ? std::exp(-2.0 * gamma) : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = labels[i] == labels[j] ? 1.0 : off;
      out.K(i, j) = v;
      out.K(j, i) = v;
    }
  }
  return out;
}

Matrix roweis_P(const LabelKernel& kernel, double r1) {
  if (!(r1 >= 0.0 && r1 <= 1.0)) {
    throw ConfigError("roweis_P: r1 must lie in [0, 1]");
  }
  const Eigen::Index n = kernel.K.rows();
  return r1 * kernel.K + (1.0 - r1) * Matrix::Identity(n, n);
}

Matrix roweis_R1(const Matrix& X, const Matrix& P) {
  if (P.rows() != P.cols() || P.rows() != X.cols()) {
    throw InvalidDimensionError(
        "roweis_R1: P must be square with dimension matching the sample "
        "count");
  }
  const Matrix Xc = center_columns(X);  // X H; H P H X^T folds into Xc P Xc^T
  Matrix R = Xc * P * Xc.transpose();
  return 0.5 * (R + R.transpose());
}

Matrix roweis_R2(const Matrix& SW, double r2, double eps) {
  if (!(r2 >= 0.0 && r2 <= 1.0)) {
    throw ConfigError("roweis_R2: r2 must lie in [0, 1]");
  }
  if (eps < 0.0) throw ConfigError("roweis_R2: eps must be nonnegative");
  const Eigen::Index d = SW.rows();
  Matrix R = r2 * SW + (1.0 - r2) * Matrix::Identity(d, d);
  if (!try_cholesky(R).ok) {
    R = regularize(R, eps);
  }
  return R;
}

int default_subspace_dim(int n_classes, int d) {
  return std::clamp(n_classes - 1, 1, std::max(d, 1));
}

RdaModel fit(const LabeledMatrix& data, RoweisFactors factors, int p,
             KernelKind kernel, double eps, double gamma,
             const std::string& fingerprint) {
  data.validate();
  factors.validate();
  const int d = static_cast<int>(data.X.rows());
  if (p < 1 || p > d) {
    std::ostringstream msg;
    msg << "fit: subspace dimensionality p=" << p << " must satisfy 1 <= p <= "
        << d;
    throw ConfigError(msg.str());
  }

  const LabelKernel Ky = label_kernel(data.labels, kernel, gamma);
  const Matrix P = roweis_P(Ky, factors.r1);
  const Matrix R1 = roweis_R1(data.X, P);
  const Matrix SW = within_scatter(data);
  const double eps_eff =
      eps >= 0.0 ? eps
                 : 1e-8 * (factors.r2 * SW.trace() +
                           (1.0 - factors.r2) * static_cast<double>(d)) /
                       static_cast<double>(d);
  const Matrix R2 = roweis_R2(SW, factors.r2, eps_eff);

  GeneralizedEigenResult eig;
  try {
    eig = solve_generalized_eig(R1, R2, p);
  } catch (const IndefiniteConstraintError& e) {
    std::ostringstream msg;
    msg << "fit: constraint matrix R2 remained indefinite after "
           "regularization (eps "
        << eps_eff << "): " << e.what();
    throw FitError(msg.str());
  }

  RdaModel model;
  model.U = eig.eigenvectors;
  model.eigenvalues = eig.eigenvalues;
  model.p = p;
  model.factors = factors;
  model.kernel = kernel;
  model.rbf_gamma = gamma;
  model.preprocessing_fingerprint = fingerprint;

  const ClassStats st = class_stats(data);
  model.pose_alphabet = st.alphabet;
  model.train_mean = st.mean;
  model.class_means_input = st.class_means;

  // Per-class means of the projected training samples.
  const int c = static_cast<int>(st.alphabet.size());
  const Matrix projected = model.U.transpose() * data.X;
  model.projected_class_means = Matrix::Zero(p, c);
  for (Eigen::Index i = 0; i < projected.cols(); ++i) {
    model.projected_class_means.col(st.idx[i]) += projected.col(i);
  }
  for (int j = 0; j < c; ++j) {
    model.projected_class_means.col(j) /= static_cast<double>(st.counts[j]);
  }
  return model;
}

Vector project(const RdaModel& model, const Vector& x) {
  if (x.size() != model.U.rows()) {
    std::ostringstream msg;
    msg << "project: vector length " << x.size()
        << " does not match model dimensionality " << model.U.rows();
    throw InvalidDimensionError(msg.str());
  }
  return model.U.transpose() * x;
}

Matrix project_columns(const RdaModel& model, const Matrix& X) {
  if (X.rows() != model.U.rows()) {
    throw InvalidDimensionError(
        "project_columns: row count does not match model dimensionality");
  }
  return model.U.transpose() * X;
}

double supervision_level(RoweisFactors factors) {
  factors.validate();
  return 0.5 * (factors.r1 + factors.r2);
}

}  // namespace roweisposes
