#pragma once

// Function encoder over feedback control policies.
//
// A BasisSet holds p neural basis functions phi_j(x, t) in R^m sharing one
// multi-head network. A task's policy is u(x, t) = sum_j c_j phi_j(x, t);
// its coefficients come from a Tikhonov-regularized least-squares
// projection of observed (x, t, u) samples onto the basis.

#include <cstdint>
#include <functional>
#include <vector>

#include "feoc/dataset.hpp"
#include "feoc/mlp.hpp"

namespace feoc {

struct BasisSet {
  MlpParams params;  // head_count = p, head_dim = m
  ProblemKind problem = ProblemKind::PointMass2D;
  /// Inputs (x, t) are standardized as (in - input_shift) / input_scale.
  Vector input_shift;
  Vector input_scale;
  double lambda_tik = 1e-3;

  int basis_count() const { return params.head_count; }
  int control_dim() const { return params.head_dim; }
  int input_dim() const { return params.input_dim(); }

  /// p x m matrix whose row j is phi_j(x, t).
  DenseMatrix evaluate(const Vector& x, double t) const;
  /// Rows of (x, t) in, N x (p * m) head-major outputs back.
  DenseMatrix evaluate_batch(const DenseMatrix& inputs) const;
  DenseMatrix normalize(const DenseMatrix& inputs) const;
};

enum class CoefficientSource { LS, Operator };

struct CoefficientVector {
  Vector c;
  CoefficientSource source = CoefficientSource::LS;
  TaskSpec task;
};

struct GramSystem {
  DenseMatrix gram;  // p x p
  Vector rhs;        // p
};

/// Monte Carlo Gram matrix and right-hand side:
/// G_jk = 1/M sum_i <phi_j, phi_k>(x_i, t_i), r_j = 1/M sum_i <u_i, phi_j>.
GramSystem gram_and_rhs(const BasisSet& basis, const TaskDataset& dataset);

/// c = (G + lambda I)^{-1} r. On NotPositiveDefinite lambda is raised 10x,
/// up to three times, before the error is rethrown.
CoefficientVector infer_coefficients_ls(const BasisSet& basis, const TaskDataset& dataset,
                                        double lambda_tik);

/// Regularized projection loss 1/M sum_i |u_i - sum_j c_j phi_j|^2 + lambda |c|^2.
double regularized_ls_loss(const BasisSet& basis, const TaskDataset& dataset, const Vector& c,
                           double lambda_tik);

/// u = sum_j c_j phi_j(x, t).
Vector policy_eval(const BasisSet& basis, const Vector& c, const Vector& x, double t);

struct FeTrainConfig {
  int p = 64;
  std::vector<int> hidden{128, 128, 128};
  Activation activation = Activation::Tanh;
  double lambda_basis = 0.0;
  double lambda_tik = 1e-3;
  double alpha = 1e-3;
  int steps = 10000;
  /// Tasks sampled per step; 0 uses every task.
  int batch = 0;
  /// Samples per task per step; tasks with more samples are subsampled.
  int samples = 256;
  std::uint64_t seed = 0;
  /// Treat the inner least-squares coefficients as constants.
  bool detach_coefficients = false;
  bool normalize_inputs = true;
};

void validate(const FeTrainConfig& config);

struct FeTrainResult {
  BasisSet basis;
  std::vector<double> loss_curve;
};

/// Called every `interval` steps with (step, loss).
using TrainProgress = std::function<void(int, double)>;

/// Trains the basis on a set of task datasets (one Adam step per iteration
/// over all tasks). Throws DivergedTraining when the loss turns non-finite.
FeTrainResult fe_train(const std::vector<TaskDataset>& datasets, const FeTrainConfig& config,
                       const TrainProgress& progress = {}, int interval = 500);

/// Continues training an existing basis.
FeTrainResult fe_train(BasisSet basis, const std::vector<TaskDataset>& datasets,
                       const FeTrainConfig& config, const TrainProgress& progress = {},
                       int interval = 500);

/// Mean over tasks of the unregularized projection error of the full
/// datasets with their own least-squares coefficients.
double fe_reconstruction_loss(const BasisSet& basis, const std::vector<TaskDataset>& datasets);

}  // namespace feoc
