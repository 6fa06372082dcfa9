#include "feoc/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "feoc/adam.hpp"

namespace feoc {

std::string to_string(Quadrature q) { return q == Quadrature::Left ? "left" : "trapezoid"; }
std::string to_string(SolverMethod m) { return m == SolverMethod::Adam ? "adam" : "lbfgs"; }

DenseMatrix dataset_inputs(const TaskDataset& d) {
  DenseMatrix in(d.size(), d.state_dim() + 1);
  in.leftCols(d.state_dim()) = d.states;
  in.col(d.state_dim()) = d.times;
  return in;
}

void append_trajectory(TaskDataset& d, const Trajectory& traj) {
  const Eigen::Index n_new = traj.controls.rows();
  const Eigen::Index old = d.size();
  d.trajectory_offsets.push_back(static_cast<std::uint64_t>(old));
  d.trajectory_objectives.push_back(traj.objective);
  DenseMatrix states(old + n_new, traj.states.cols());
  DenseMatrix controls(old + n_new, traj.controls.cols());
  Vector times(old + n_new);
  if (old > 0) {
    states.topRows(old) = d.states;
    controls.topRows(old) = d.controls;
    times.head(old) = d.times;
  }
  states.bottomRows(n_new) = traj.states.topRows(n_new);
  controls.bottomRows(n_new) = traj.controls;
  times.tail(n_new) = traj.times.head(n_new);
  d.states = std::move(states);
  d.controls = std::move(controls);
  d.times = std::move(times);
}

void validate_dataset(const TaskDataset& d) {
  if (d.size() < 1) throw ShapeMismatch("dataset has no samples");
  if (d.times.size() != d.size() || d.controls.rows() != d.size()) {
    throw ShapeMismatch("dataset state/time/control row counts differ");
  }
  if (d.task.target.size() != d.state_dim()) {
    throw ShapeMismatch("dataset task target does not match state dimension");
  }
}

double discretized_objective(const ControlProblem& problem, const TaskSpec& task,
                             const DenseMatrix& controls, const Vector& x0,
                             Quadrature quadrature) {
  if (controls.rows() != problem.n_steps || controls.cols() != problem.control_dim) {
    throw DimensionMismatch("discretized_objective: control grid must be " +
                            std::to_string(problem.n_steps) + "x" +
                            std::to_string(problem.control_dim));
  }
  const double j = discretized_objective<double>(problem, task, controls, x0, quadrature);
  if (!std::isfinite(j)) throw NonFiniteState(problem.name() + ": objective is not finite");
  return j;
}

ObjectiveGradient objective_and_gradient(const ControlProblem& problem, const TaskSpec& task,
                                         const DenseMatrix& controls, const Vector& x0,
                                         Quadrature quadrature) {
  using ad::Real;
  if (controls.rows() != problem.n_steps || controls.cols() != problem.control_dim) {
    throw DimensionMismatch("objective_and_gradient: bad control grid shape");
  }
  thread_local ad::ScalarTape tape;
  tape.clear();
  MatrixX<Real> u(controls.rows(), controls.cols());
  for (Eigen::Index i = 0; i < controls.rows(); ++i)
    for (Eigen::Index j = 0; j < controls.cols(); ++j) u(i, j) = tape.variable(controls(i, j));
  VectorX<Real> x(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) x(i) = Real(x0(i));
  const Real j = discretized_objective<Real>(problem, task, u, x, quadrature);
  ObjectiveGradient out;
  out.value = j.value();
  if (!std::isfinite(out.value)) throw NonFiniteState(problem.name() + ": objective diverged");
  const std::vector<double> adj = tape.gradient(j);
  out.gradient.resize(controls.rows(), controls.cols());
  for (Eigen::Index i = 0; i < controls.rows(); ++i)
    for (Eigen::Index k = 0; k < controls.cols(); ++k)
      out.gradient(i, k) = adj[u(i, k).index()];
  return out;
}

Trajectory trajectory_from_controls(const ControlProblem& problem, const TaskSpec& task,
                                    const Vector& x0, const DenseMatrix& controls,
                                    Quadrature quadrature) {
  int k = 0;
  Trajectory traj = rk4_rollout(problem, x0, [&](const Vector&, double) -> Vector {
    return controls.row(k++).transpose();
  });
  traj.objective = discretized_objective(problem, task, controls, x0, quadrature);
  return traj;
}

DenseMatrix initial_guess(const ControlProblem& problem, const TaskSpec& task, const Vector& x0,
                          int index) {
  const int n = problem.n_steps;
  DenseMatrix u = DenseMatrix::Zero(n, problem.control_dim);
  if (index <= 0) return u;
  const double side = (index % 2 == 1) ? 1.0 : -1.0;
  const double level = std::ceil(index / 2.0);
  const double T = problem.horizon;
  const double h = problem.step();
  switch (problem.kind) {
    case ProblemKind::PointMass2D: {
      const Eigen::Vector2d d = task.target.head<2>() - x0.head<2>();
      const double len = std::max(d.norm(), 1e-9);
      const Eigen::Vector2d perp(-d(1) / len, d(0) / len);
      for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * h;
        const double bend = side * 4.0 * level * std::cos(std::numbers::pi * t / T);
        u.row(k) = (d / T + bend * perp).transpose();
      }
      break;
    }
    case ProblemKind::Bicycle4D: {
      const double dist = (task.target.head<2>() - x0.head<2>()).norm();
      for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * h;
        u(k, 0) = side * 0.15 * level * std::sin(2.0 * std::numbers::pi * t / T);
        u(k, 1) = 6.0 * dist / (T * T) * (1.0 - 2.0 * t / T);
      }
      break;
    }
    case ProblemKind::Quadcopter12D: {
      std::mt19937_64 rng(mix_seed(0x51ab, static_cast<std::uint64_t>(index)));
      std::normal_distribution<double> normal(0.0, 0.1);
      for (int k = 0; k < n; ++k) {
        u(k, 0) = kQuadMass * kGravity;
        for (int c = 1; c < 4; ++c) u(k, c) = normal(rng);
      }
      break;
    }
  }
  return u;
}

namespace {

struct SolveState {
  DenseMatrix best_controls;
  double best_objective = std::numeric_limits<double>::infinity();
  double best_grad_norm = std::numeric_limits<double>::infinity();

  void offer(const DenseMatrix& u, double j, double gnorm) {
    if (j < best_objective) {
      best_objective = j;
      best_controls = u;
      best_grad_norm = gnorm;
    }
  }
};

ObjectiveGradient safe_eval(const ControlProblem& problem, const TaskSpec& task,
                            const DenseMatrix& u, const Vector& x0, Quadrature q) {
  try {
    return objective_and_gradient(problem, task, u, x0, q);
  } catch (const NonFiniteState&) {
    ObjectiveGradient bad;
    bad.value = std::numeric_limits<double>::infinity();
    bad.gradient = DenseMatrix::Zero(u.rows(), u.cols());
    return bad;
  }
}

void run_adam(const ControlProblem& problem, const TaskSpec& task, const Vector& x0,
              DenseMatrix u, const SolveOptions& opts, SolveState& state) {
  Vector params = Eigen::Map<const Vector>(u.data(), u.size());
  AdamState adam = adam_init(params.size(), opts.learning_rate);
  for (int it = 0; it <= opts.max_iters; ++it) {
    Eigen::Map<Vector>(u.data(), u.size()) = params;
    const ObjectiveGradient eval = safe_eval(problem, task, u, x0, opts.quadrature);
    if (!std::isfinite(eval.value)) break;
    const double gnorm = eval.gradient.cwiseAbs().maxCoeff();
    state.offer(u, eval.value, gnorm);
    if (gnorm <= opts.grad_tol || it == opts.max_iters) break;
    const Vector g = Eigen::Map<const Vector>(eval.gradient.data(), eval.gradient.size());
    adam_step(params, g, adam);
  }
}

// Limited-memory BFGS with a backtracking Armijo line search.
void run_lbfgs(const ControlProblem& problem, const TaskSpec& task, const Vector& x0,
               DenseMatrix u, const SolveOptions& opts, SolveState& state) {
  auto as_vec = [](const DenseMatrix& m) {
    return Vector(Eigen::Map<const Vector>(m.data(), m.size()));
  };
  auto as_mat = [&](const Vector& v) {
    DenseMatrix m(u.rows(), u.cols());
    Eigen::Map<Vector>(m.data(), m.size()) = v;
    return m;
  };
  Vector x = as_vec(u);
  ObjectiveGradient eval = safe_eval(problem, task, u, x0, opts.quadrature);
  if (!std::isfinite(eval.value)) return;
  Vector g = as_vec(eval.gradient);
  double f = eval.value;
  state.offer(u, f, g.cwiseAbs().maxCoeff());
  std::deque<std::pair<Vector, Vector>> memory;
  std::deque<double> rhos;
  int fails = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    if (g.cwiseAbs().maxCoeff() <= opts.grad_tol) break;
    // two-loop recursion
    Vector q = g;
    std::vector<double> alphas(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      alphas[i] = rhos[i] * memory[i].first.dot(q);
      q -= alphas[i] * memory[i].second;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.squaredNorm();
    } else {
      q *= 1.0 / std::max(1.0, g.norm());
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double beta = rhos[i] * memory[i].second.dot(q);
      q += (alphas[i] - beta) * memory[i].first;
    }
    Vector dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      rhos.clear();
      dir = -g / std::max(1.0, g.norm());
      slope = g.dot(dir);
    }
    double step = 1.0;
    bool accepted = false;
    Vector x_new;
    ObjectiveGradient e_new;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + step * dir;
      e_new = safe_eval(problem, task, as_mat(x_new), x0, opts.quadrature);
      if (std::isfinite(e_new.value) && e_new.value <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (memory.empty() || ++fails > 2) break;
      memory.clear();
      rhos.clear();
      continue;
    }
    const Vector g_new = as_vec(e_new.gradient);
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      rhos.push_back(1.0 / sy);
      if (static_cast<int>(memory.size()) > opts.lbfgs_memory) {
        memory.pop_front();
        rhos.pop_front();
      }
    }
    const bool stalled = std::abs(f - e_new.value) <= 1e-15 * std::max(1.0, std::abs(f));
    x = x_new;
    g = g_new;
    f = e_new.value;
    state.offer(as_mat(x), f, g.cwiseAbs().maxCoeff());
    if (stalled && g.cwiseAbs().maxCoeff() > opts.grad_tol) {
      if (memory.empty()) break;
      memory.clear();
      rhos.clear();
    }
  }
}

}  // namespace

Trajectory solve_open_loop(const ControlProblem& problem, const TaskSpec& task, const Vector& x0,
                           const SolveOptions& opts) {
  validate_task(problem, task);
  detail::check_dims(problem, x0.size(), -1);
  SolveState best;
  const int starts = std::max(1, opts.n_starts);
  for (int s = 0; s < starts; ++s) {
    SolveState local;
    const DenseMatrix guess = initial_guess(problem, task, x0, s);
    if (opts.method == SolverMethod::Adam) {
      run_adam(problem, task, x0, guess, opts, local);
    } else {
      run_lbfgs(problem, task, x0, guess, opts, local);
    }
    if (local.best_objective < best.best_objective) best = std::move(local);
  }
  if (!std::isfinite(best.best_objective)) {
    throw NonFiniteState(problem.name() + ": every start diverged");
  }
  Trajectory traj = trajectory_from_controls(problem, task, x0, best.best_controls,
                                             opts.quadrature);
  traj.grad_norm = best.best_grad_norm;
  traj.converged = best.best_grad_norm <= opts.grad_tol;
  return traj;
}

CostBreakdown cost_breakdown(const ControlProblem& problem, const TaskSpec& task,
                             const Trajectory& traj, Quadrature quadrature) {
  CostBreakdown c;
  const double h = problem.step();
  for (Eigen::Index k = 0; k < traj.controls.rows(); ++k) {
    const Vector u = traj.controls.row(k).transpose();
    const Vector x = traj.states.row(k).transpose();
    const double uc = control_cost_rate<double>(u);
    const double oc = obstacle_cost_rate<double>(problem, task, x);
    if (quadrature == Quadrature::Left) {
      c.control += uc * h;
      c.obstacle += oc * h;
    } else {
      const Vector x1 = traj.states.row(k + 1).transpose();
      c.control += uc * h;
      c.obstacle += 0.5 * (oc + obstacle_cost_rate<double>(problem, task, x1)) * h;
    }
  }
  const Vector xT = traj.states.bottomRows(1).transpose();
  c.terminal = terminal_cost<double>(problem, task, xT);
  return c;
}

Vector dataset_initial_state(const ControlProblem& problem, std::uint64_t seed, int index) {
  return sample_initial_state(problem, mix_seed(seed, static_cast<std::uint64_t>(index)));
}

DatagenResult generate_task_dataset(const ControlProblem& problem, const TaskSpec& task,
                                    int n_traj, std::uint64_t seed, const SolveOptions& opts) {
  if (n_traj < 1) throw Error("generate_task_dataset: n_traj must be >= 1");
  validate_task(problem, task);
  std::vector<Trajectory> solved(static_cast<std::size_t>(n_traj));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_traj; ++i) {
    const Vector x0 = dataset_initial_state(problem, seed, i);
    solved[static_cast<std::size_t>(i)] = solve_open_loop(problem, task, x0, opts);
  }
  DatagenResult out;
  out.dataset.problem = problem.kind;
  out.dataset.task = task;
  out.dataset.seed = seed;
  out.dataset.horizon = problem.horizon;
  out.dataset.n_steps = problem.n_steps;
  out.dataset.states.resize(0, problem.state_dim);
  out.dataset.controls.resize(0, problem.control_dim);
  for (auto& traj : solved) {
    if (!traj.converged) {
      ++out.unconverged;
      continue;
    }
    append_trajectory(out.dataset, traj);
    out.trajectories.push_back(std::move(traj));
  }
  if (out.unconverged * 10 > n_traj || out.trajectories.empty()) {
    throw NotConverged(problem.name() + ": " + std::to_string(out.unconverged) + " of " +
                       std::to_string(n_traj) + " trajectory solves did not converge");
  }
  return out;
}

}  // namespace feoc
