#pragma once

#include <cstdint>
#include <vector>

#include "feoc/control_problem.hpp"
#include "feoc/dataset.hpp"
#include "feoc/scalar_ad.hpp"

namespace feoc {

enum class Quadrature { Left, Trapezoid };
enum class SolverMethod { Adam, Lbfgs };

std::string to_string(Quadrature q);
std::string to_string(SolverMethod m);

struct SolveOptions {
  SolverMethod method = SolverMethod::Lbfgs;
  int max_iters = 20000;
  double grad_tol = 1e-4;
  double learning_rate = 0.05;  // Adam only
  int lbfgs_memory = 10;
  int n_starts = 1;
  Quadrature quadrature = Quadrature::Left;
};

/// Running cost integrated over the control grid plus terminal cost, for
/// piecewise-constant `controls` (n_steps x m) starting at x0.
template <typename S>
S discretized_objective(const ControlProblem& problem, const TaskSpec& task,
                        const MatrixX<S>& controls, const VectorX<S>& x0,
                        Quadrature quadrature = Quadrature::Left) {
  const double h = problem.step();
  VectorX<S> x = x0;
  S acc(0.0);
  for (int k = 0; k < problem.n_steps; ++k) {
    const VectorX<S> u = controls.row(k).transpose();
    const S lk = running_cost(problem, task, x, u);
    auto f = [&](const VectorX<S>& s, double) { return dynamics_eval<S>(problem, s, u); };
    x = rk4_step(f, x, k * h, h);
    if (quadrature == Quadrature::Left) {
      acc += lk * S(h);
    } else {
      acc += (lk + running_cost(problem, task, x, u)) * S(0.5 * h);
    }
  }
  return acc + terminal_cost(problem, task, x);
}

double discretized_objective(const ControlProblem& problem, const TaskSpec& task,
                             const DenseMatrix& controls, const Vector& x0,
                             Quadrature quadrature = Quadrature::Left);

struct ObjectiveGradient {
  double value = 0.0;
  DenseMatrix gradient;  // n_steps x m
};

/// Objective and its exact gradient w.r.t. the control grid by reverse-mode
/// differentiation through the RK4 rollout.
ObjectiveGradient objective_and_gradient(const ControlProblem& problem, const TaskSpec& task,
                                         const DenseMatrix& controls, const Vector& x0,
                                         Quadrature quadrature = Quadrature::Left);

/// Rollout of fixed open-loop controls with its objective filled in.
Trajectory trajectory_from_controls(const ControlProblem& problem, const TaskSpec& task,
                                    const Vector& x0, const DenseMatrix& controls,
                                    Quadrature quadrature = Quadrature::Left);

/// Direct single-shooting transcription: minimizes the discretized objective
/// over the control grid and returns the best iterate over all starts.
/// Start 0 is the zero-control guess. converged reports whether the best
/// iterate met grad_tol in the infinity norm.
Trajectory solve_open_loop(const ControlProblem& problem, const TaskSpec& task, const Vector& x0,
                           const SolveOptions& opts = {});

/// Initial control guess for start `index` (0 = zero controls).
DenseMatrix initial_guess(const ControlProblem& problem, const TaskSpec& task, const Vector& x0,
                          int index);

struct CostBreakdown {
  double control = 0.0;
  double obstacle = 0.0;
  double terminal = 0.0;
  double total() const { return control + obstacle + terminal; }
};

/// Splits the discretized objective of a trajectory into its terms.
CostBreakdown cost_breakdown(const ControlProblem& problem, const TaskSpec& task,
                             const Trajectory& traj, Quadrature quadrature = Quadrature::Left);

struct DatagenResult {
  TaskDataset dataset;
  std::vector<Trajectory> trajectories;  // converged ones, in dataset order
  int unconverged = 0;
};

/// Solves n_traj problems from seeded initial states and flattens the
/// converged trajectories into one dataset. Throws NotConverged when more
/// than 10% of the solves miss the tolerance.
DatagenResult generate_task_dataset(const ControlProblem& problem, const TaskSpec& task,
                                    int n_traj, std::uint64_t seed,
                                    const SolveOptions& opts = {});

/// Initial state used for trajectory `index` of a dataset seeded with `seed`.
Vector dataset_initial_state(const ControlProblem& problem, std::uint64_t seed, int index);

}  // namespace feoc
