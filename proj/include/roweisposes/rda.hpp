#pragma once

#include <string>
#include <vector>

#include "roweisposes/geigen.hpp"

namespace roweisposes {

// Vectorized pose frames (columns of X) with one class label per column.
struct LabeledMatrix {
  Matrix X;                         // d x n
  std::vector<std::string> labels;  // length n

  void validate() const;  // InvalidDimensionError / DataError
};

// Point on the Roweis map. r1 mixes the label kernel into the first Roweis
// matrix, r2 mixes the within scatter into the second. The four corners
// recover PCA (0,0), SPCA (1,0), FDA (0,1) and DSDA (1,1).
struct RoweisFactors {
  double r1 = 0.0;
  double r2 = 0.0;

  void validate() const;  // ConfigError outside [0,1]^2
};

enum class KernelKind { Delta, Linear, Rbf };

KernelKind kernel_from_string(const std::string& name);  // ConfigError
std::string to_string(KernelKind kind);

struct LabelKernel {
  KernelKind kind = KernelKind::Delta;
  double gamma = 1.0;  // rbf only
  Matrix K;            // n x n, symmetric PSD
};

// Scatter matrices. All are d x d, symmetric, positive semidefinite, and
// satisfy total == between + within.
Matrix between_scatter(const LabeledMatrix& data);
Matrix within_scatter(const LabeledMatrix& data);
Matrix total_scatter(const LabeledMatrix& data);

// Kernel matrix over categorical labels. delta: exact-match indicator.
// linear: inner product of one-hot encodings (identical to delta for single
// labels). rbf: exp(-gamma * ||one-hot difference||^2).
LabelKernel label_kernel(const std::vector<std::string>& labels,
                         KernelKind kind, double gamma = 1.0);

// P = r1 * K_y + (1 - r1) * I.
Matrix roweis_P(const LabelKernel& kernel, double r1);

// R1 = X H P H X^T. With P = I this is the total scatter; with P = K_y it is
// the dependence-maximizing SPCA matrix.
Matrix roweis_R1(const Matrix& X, const Matrix& P);

// R2 = r2 * S_W + (1 - r2) * I, with eps * I added only when the convex
// combination fails a positive-definite factorization. eps must be >= 0.
Matrix roweis_R2(const Matrix& SW, double r2, double eps);

// Fitted subspace model: projection matrix, pose alphabet, projected class
// means, and enough input-space statistics to stand alone at inference time.
struct RdaModel {
  Matrix U;  // d x p, columns R2-orthonormal at fit time
  int p = 0;
  std::vector<std::string> pose_alphabet;  // sorted class labels
  Matrix projected_class_means;            // p x c, column j <-> alphabet[j]
  Vector train_mean;                       // input-space mean, length d
  Matrix class_means_input;                // d x c
  Vector eigenvalues;                      // length p, non-increasing
  RoweisFactors factors;
  KernelKind kernel = KernelKind::Delta;
  double rbf_gamma = 1.0;
  std::string preprocessing_fingerprint;

  int dim() const { return static_cast<int>(U.rows()); }
  int n_classes() const { return static_cast<int>(pose_alphabet.size()); }
};

// Classical discriminant-subspace default: c - 1 capped to [1, d].
int default_subspace_dim(int n_classes, int d);

// Fits the subspace spanned by the top-p eigenvectors of the pencil
// (R1, R2) and stores per-class means of the projected training data.
// eps < 0 selects the scale-aware default 1e-8 * trace(R2) / d, applied
// only on factorization failure.
RdaModel fit(const LabeledMatrix& data, RoweisFactors factors, int p,
             KernelKind kernel = KernelKind::Delta, double eps = -1.0,
             double gamma = 1.0, const std::string& fingerprint = "");

// U^T x.
Vector project(const RdaModel& model, const Vector& x);
Matrix project_columns(const RdaModel& model, const Matrix& X);

// s = (r1 + r2) / 2.
double supervision_level(RoweisFactors factors);

// Sorted distinct labels; the order used everywhere a class index appears.
std::vector<std::string> sorted_unique_labels(
    const std::vector<std::string>& labels);

}  // namespace roweisposes
