#include "feoc/control_problem.hpp"

#include <numbers>

namespace feoc {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::PointMass2D: return "PointMass2D";
    case ProblemKind::Quadcopter12D: return "Quadcopter12D";
    case ProblemKind::Bicycle4D: return "Bicycle4D";
  }
  return "?";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "PointMass2D") return ProblemKind::PointMass2D;
  if (name == "Quadcopter12D") return ProblemKind::Quadcopter12D;
  if (name == "Bicycle4D") return ProblemKind::Bicycle4D;
  throw Error("unknown problem '" + name + "'");
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Target: return "Target";
    case TaskKind::SingleObstacle: return "SingleObstacle";
    case TaskKind::DoubleObstacle: return "DoubleObstacle";
  }
  return "?";
}

ControlProblem point_mass_2d() {
  ControlProblem p;
  p.kind = ProblemKind::PointMass2D;
  p.state_dim = 2;
  p.control_dim = 2;
  p.horizon = 1.0;
  p.n_steps = 20;
  p.init_mean = Vector::Constant(2, -1.5);
  p.init_std = Vector::Constant(2, std::sqrt(0.4));
  p.terminal_weight = 50.0;
  return p;
}

ControlProblem quadcopter_12d() {
  ControlProblem p;
  p.kind = ProblemKind::Quadcopter12D;
  p.state_dim = 12;
  p.control_dim = 4;
  p.horizon = 2.0;
  p.n_steps = 50;
  p.init_mean = Vector::Zero(12);
  p.init_mean.head(3).setConstant(-2.0);
  p.init_std = Vector::Zero(12);
  p.init_std.head(3).setConstant(0.5);
  p.terminal_weight = 500.0;
  p.fixed_obstacle = false;
  return p;
}

ControlProblem bicycle_4d(int n_steps) {
  ControlProblem p;
  p.kind = ProblemKind::Bicycle4D;
  p.state_dim = 4;
  p.control_dim = 2;
  p.horizon = 5.0;
  p.n_steps = n_steps;
  p.init_mean = Vector::Zero(4);
  p.init_mean(2) = std::numbers::pi / 4.0;
  p.init_std = Vector::Zero(4);
  p.init_std.head(2).setConstant(0.35);
  p.terminal_weight = 50.0;
  p.fixed_obstacle = false;
  if (n_steps < 1) throw Error("bicycle_4d: n_steps must be >= 1");
  return p;
}

ControlProblem make_problem(ProblemKind kind, int n_steps) {
  ControlProblem p;
  switch (kind) {
    case ProblemKind::PointMass2D: p = point_mass_2d(); break;
    case ProblemKind::Quadcopter12D: p = quadcopter_12d(); break;
    case ProblemKind::Bicycle4D: p = bicycle_4d(); break;
  }
  if (n_steps > 0) p.n_steps = n_steps;
  return p;
}

Vector bicycle_target() {
  Vector y(4);
  y << 5.0, 5.0, std::numbers::pi / 4.0, 0.0;
  return y;
}

TaskSpec target_task(const ControlProblem& problem, const Vector& target) {
  TaskSpec t;
  t.kind = TaskKind::Target;
  t.terminal_weight = problem.terminal_weight;
  if (problem.kind == ProblemKind::Quadcopter12D && target.size() == 3) {
    t.target = Vector::Zero(12);
    t.target.head(3) = target;
  } else {
    t.target = target;
  }
  validate_task(problem, t);
  return t;
}

TaskSpec obstacle_task(const ControlProblem& problem, std::vector<Obstacle> obstacles) {
  TaskSpec t;
  t.kind = obstacles.size() == 2 ? TaskKind::DoubleObstacle : TaskKind::SingleObstacle;
  t.target = bicycle_target();
  t.obstacles = std::move(obstacles);
  t.terminal_weight = problem.terminal_weight;
  validate_task(problem, t);
  return t;
}

void validate_task(const ControlProblem& problem, const TaskSpec& task) {
  if (task.target.size() != problem.state_dim) {
    throw DimensionMismatch("task target has " + std::to_string(task.target.size()) +
                            " entries, " + problem.name() + " state has " +
                            std::to_string(problem.state_dim));
  }
  switch (task.kind) {
    case TaskKind::Target:
      if (!task.obstacles.empty()) throw Error("Target task must not carry obstacles");
      break;
    case TaskKind::SingleObstacle:
      if (task.obstacles.size() != 1) throw Error("SingleObstacle task needs exactly 1 obstacle");
      break;
    case TaskKind::DoubleObstacle:
      if (task.obstacles.size() != 2) throw Error("DoubleObstacle task needs exactly 2 obstacles");
      break;
  }
  if (task.kind != TaskKind::Target && problem.kind != ProblemKind::Bicycle4D) {
    throw UnsupportedTaskKind("obstacle tasks are defined for Bicycle4D only");
  }
  for (const auto& ob : task.obstacles) {
    if (!(ob.sigma > 0.0) || ob.amplitude < 0.0) {
      throw Error("obstacle needs sigma > 0 and amplitude >= 0");
    }
  }
  if (!task.target.allFinite() || !(task.terminal_weight > 0.0)) {
    throw Error("task target must be finite with positive terminal weight");
  }
}

Trajectory rk4_rollout(const ControlProblem& problem, const Vector& x0,
                       const ControlFn& control_fn) {
  detail::check_dims(problem, x0.size(), -1);
  const int n = problem.n_steps;
  const double h = problem.step();
  Trajectory traj;
  traj.times = Vector::LinSpaced(n + 1, 0.0, problem.horizon);
  traj.states.resize(n + 1, problem.state_dim);
  traj.controls.resize(n, problem.control_dim);
  Vector x = x0;
  traj.states.row(0) = x.transpose();
  for (int k = 0; k < n; ++k) {
    const double t = k * h;
    const Vector u = control_fn(x, t);
    detail::check_dims(problem, x.size(), u.size());
    traj.controls.row(k) = u.transpose();
    auto f = [&](const Vector& s, double) { return dynamics_eval<double>(problem, s, u); };
    x = rk4_step(f, x, t, h);
    if (!x.allFinite() || !u.allFinite()) {
      throw NonFiniteState(problem.name() + ": state diverged at step " + std::to_string(k));
    }
    traj.states.row(k + 1) = x.transpose();
  }
  return traj;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector sample_initial_state(const ControlProblem& problem, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(problem.state_dim);
  for (int i = 0; i < problem.state_dim; ++i) {
    const double z = normal(rng);
    x(i) = problem.init_mean(i) + problem.init_std(i) * z;
  }
  return x;
}

Vector sample_initial_state(const ControlProblem& problem, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_initial_state(problem, rng);
}

}  // namespace feoc
