#pragma once

// Small builders shared by the unit and acceptance tests.

#include <random>
#include <vector>

#include "feoc/function_encoder.hpp"
#include "feoc/trajopt.hpp"

namespace fixtures {

/// Basis with identity input normalization around a random network.
inline feoc::BasisSet random_basis(feoc::ProblemKind kind, int p, std::vector<int> hidden,
                                   std::uint64_t seed) {
  const feoc::ControlProblem prob = feoc::make_problem(kind);
  std::vector<int> widths{prob.state_dim + 1};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  feoc::BasisSet b;
  b.params = feoc::mlp_init(widths, feoc::Activation::Tanh, p, prob.control_dim, seed);
  b.problem = kind;
  b.input_shift = feoc::Vector::Zero(prob.state_dim + 1);
  b.input_scale = feoc::Vector::Ones(prob.state_dim + 1);
  return b;
}

/// M random (x, t) samples with zero controls for the given problem.
inline feoc::TaskDataset random_inputs(feoc::ProblemKind kind, int M, std::uint64_t seed) {
  const feoc::ControlProblem prob = feoc::make_problem(kind);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, prob.horizon);
  feoc::TaskDataset d;
  d.problem = kind;
  feoc::Vector y = feoc::Vector::Ones(prob.kind == feoc::ProblemKind::Quadcopter12D ? 3 : prob.state_dim);
  d.task = feoc::target_task(prob, y);
  d.states.resize(M, prob.state_dim);
  d.times.resize(M);
  d.controls = feoc::DenseMatrix::Zero(M, prob.control_dim);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < prob.state_dim; ++j) d.states(i, j) = n01(rng);
    d.times(i) = ut(rng);
  }
  d.trajectory_objectives = {0.0};
  d.trajectory_offsets = {0};
  d.horizon = prob.horizon;
  d.n_steps = prob.n_steps;
  return d;
}

/// Sets controls to sum_j c_j phi_j at every sample.
inline void label_with(feoc::TaskDataset& d, const feoc::BasisSet& b, const feoc::Vector& c) {
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d.controls.row(i) = feoc::policy_eval(b, c, d.states.row(i).transpose(), d.times(i)).transpose();
  }
}

}  // namespace fixtures
