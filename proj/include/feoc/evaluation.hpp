#pragma once

// Closed-loop deployment of function-encoder policies and the metrics that
// compare them against the trajectory-optimization oracle.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "feoc/function_encoder.hpp"
#include "feoc/operator_net.hpp"
#include "feoc/trajopt.hpp"

namespace feoc {

enum class InferenceMethod { LS, Operator };

std::string to_string(InferenceMethod m);
InferenceMethod inference_method_from_string(const std::string& name);

/// Rolls the feedback policy u = sum_j c_j phi_j(x, t) from x0 and fills in
/// its discretized objective. Throws NonFiniteState on divergence.
Trajectory rollout_policy(const ControlProblem& problem, const TaskSpec& task,
                          const BasisSet& basis, const Vector& c, const Vector& x0,
                          Quadrature quadrature = Quadrature::Left);

/// Distance between final position and target position (x, y[, z]).
double terminal_deviation(const ControlProblem& problem, const TaskSpec& task,
                          const Trajectory& traj);

struct EvalTask {
  std::string id;
  std::string group;  // e.g. "seen", "interpolation", "extrapolation"
  TaskSpec task;
};

struct EvalPlan {
  std::vector<InferenceMethod> methods{InferenceMethod::LS};
  std::vector<EvalTask> tasks;
  int n_init = 10;
  std::uint64_t seed = 0;
  /// Oracle trajectories per task used as LS inference data.
  int budget = 1;
  SolveOptions solver;
};

struct EvalRow {
  std::string task_id;
  std::string group;
  InferenceMethod method = InferenceMethod::LS;
  double true_objective = 0.0;
  double predicted_objective = 0.0;
  double control_cost = 0.0;
  double obstacle_cost = 0.0;
  double terminal_cost = 0.0;
  double terminal_deviation = 0.0;
  double oracle_control_cost = 0.0;
  double oracle_obstacle_cost = 0.0;
  double oracle_terminal_deviation = 0.0;
  int n_rollouts = 0;
  int diverged = 0;
  double inference_seconds = 0.0;

  double gap() const { return predicted_objective - true_objective; }
};

/// Trajectories behind one report row, kept for plotting.
struct RowTrajectories {
  std::string task_id;
  std::string group;
  InferenceMethod method = InferenceMethod::LS;
  TaskSpec task;
  std::vector<Trajectory> oracle;
  std::vector<Trajectory> policy;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

struct GroupSummary {
  std::string group;
  InferenceMethod method = InferenceMethod::LS;
  int tasks = 0;
  double true_objective = 0.0;
  double predicted_objective = 0.0;
  double control_cost = 0.0;
  double obstacle_cost = 0.0;
  double terminal_deviation = 0.0;
  double oracle_control_cost = 0.0;
  double oracle_obstacle_cost = 0.0;
  double oracle_terminal_deviation = 0.0;
  double ratio() const { return predicted_objective / true_objective; }
};

/// Means per (group, method) in first-appearance order.
std::vector<GroupSummary> summarize(const EvalReport& report);

/// For every task and method: infer c, roll out from n_init fresh initial
/// states, solve the same states with the oracle and fill the metrics.
/// `op` is required when the plan lists the operator method.
EvalReport evaluate_plan(const ControlProblem& problem, const BasisSet& basis,
                         const OperatorNet* op, const EvalPlan& plan,
                         std::vector<RowTrajectories>* trajectories = nullptr);

/// Task ids of the k rows with the largest predicted - true gap (ties by id).
std::vector<std::string> worst_case_select(const EvalReport& report, std::size_t k);

/// Rows whose predicted objective undercuts the oracle by more than `slack`
/// (relative); a non-empty result means an oracle solve was suboptimal.
std::vector<std::string> oracle_dominance_violations(const EvalReport& report, double slack = 0.01);

/// Initial state of rollout `index` for task `task_index` of a plan.
Vector eval_initial_state(const ControlProblem& problem, std::uint64_t seed,
                          std::size_t task_index, int index);

}  // namespace feoc
