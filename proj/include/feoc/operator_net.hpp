#pragma once

// Task-to-coefficient operator: psi(eta) -> c(eta) for compactly
// parameterized (target) tasks, trained against least-squares coefficients
// of a frozen basis.

#include <cstdint>
#include <vector>

#include "feoc/function_encoder.hpp"

namespace feoc {

/// Axis-aligned box of the training task parameters; eta is mapped to [0,1]^d.
struct EtaBox {
  Vector lo;
  Vector hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

/// Free target coordinates of a Target task, normalized to `box`.
/// Throws UnsupportedTaskKind for obstacle tasks.
Vector encode_eta(const TaskSpec& task, const EtaBox& box);

/// Number of free target coordinates for a problem (2 for PointMass2D,
/// 3 for Quadcopter12D); throws UnsupportedTaskKind for Bicycle4D.
int eta_dim(ProblemKind problem);

/// Bounding box of the tasks' free coordinates; degenerate axes get unit width.
EtaBox eta_box_for(ProblemKind problem, const std::vector<TaskSpec>& tasks);

struct OperatorNet {
  MlpParams params;  // eta_dim -> p (head_count = p, head_dim = 1)
  ProblemKind problem = ProblemKind::PointMass2D;
  EtaBox box;
  /// psi(eta) = output_shift + output_scale .* net(eta)
  Vector output_shift;
  Vector output_scale;
  std::uint64_t basis_checksum = 0;

  int basis_count() const { return params.output_dim(); }
  Vector apply(const Vector& eta) const;
};

struct OperatorTrainConfig {
  double beta = 1e-3;
  int steps = 5000;
  std::uint64_t seed = 0;
  std::vector<int> hidden{64, 64, 64};
  Activation activation = Activation::Tanh;
};

void validate(const OperatorTrainConfig& config);

struct OperatorTrainResult {
  OperatorNet net;
  double final_loss = 0.0;
  std::vector<double> loss_curve;
  /// Cached least-squares coefficients, one per training task.
  std::vector<Vector> targets;
};

/// Fits psi to the least-squares coefficients of each dataset under the
/// frozen basis. Requires at least two tasks unless `allow_single` is set.
OperatorTrainResult operator_train(const BasisSet& basis, const std::vector<TaskDataset>& pairs,
                                   const OperatorTrainConfig& config, bool allow_single = false);

/// c = psi(encode_eta(task)). Throws BasisMismatch if the net was trained
/// for a different basis.
CoefficientVector operator_infer(const OperatorNet& net, const BasisSet& basis,
                                 const TaskSpec& task);

}  // namespace feoc
