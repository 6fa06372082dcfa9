#pragma once

#include <cstdint>
#include <vector>

#include "feoc/control_problem.hpp"

namespace feoc {

/// Labeled state-time-control samples for one task: the unit of both FE
/// training and online least-squares inference.
struct TaskDataset {
  ProblemKind problem = ProblemKind::PointMass2D;
  TaskSpec task;
  DenseMatrix states;    // M x n
  Vector times;          // M
  DenseMatrix controls;  // M x m
  /// Objective of each source trajectory and the index of its first sample.
  std::vector<double> trajectory_objectives;
  std::vector<std::uint64_t> trajectory_offsets;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  int n_steps = 0;

  Eigen::Index size() const { return states.rows(); }
  int state_dim() const { return static_cast<int>(states.cols()); }
  int control_dim() const { return static_cast<int>(controls.cols()); }
};

/// Rows (x, t) ready for basis evaluation.
DenseMatrix dataset_inputs(const TaskDataset& d);

/// Appends the (x_k, t_k, u_k) samples of a solved trajectory.
void append_trajectory(TaskDataset& d, const Trajectory& traj);

/// Throws ShapeMismatch when rows or dimensions disagree, or M == 0.
void validate_dataset(const TaskDataset& d);

}  // namespace feoc
