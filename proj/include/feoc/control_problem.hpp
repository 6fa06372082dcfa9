#pragma once

// Benchmark parametric optimal control problems: fixed dynamics, task-dependent
// running and terminal costs.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "feoc/dense.hpp"
#include "feoc/errors.hpp"
#include "feoc/rk4.hpp"

namespace feoc {

enum class ProblemKind { PointMass2D, Quadcopter12D, Bicycle4D };
enum class TaskKind { Target, SingleObstacle, DoubleObstacle };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);
std::string to_string(TaskKind kind);

inline constexpr double kGravity = 9.8;
inline constexpr double kQuadMass = 1.0;
inline constexpr double kWheelbase = 0.5;

/// Gaussian bump A * exp(-|p - mu|^2 / (2 sigma^2)) on the planar position.
struct Obstacle {
  double amplitude = 0.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double sigma = 1.0;
};

/// One problem instance: target state, obstacle set and terminal weight.
struct TaskSpec {
  TaskKind kind = TaskKind::Target;
  Vector target;
  std::vector<Obstacle> obstacles;
  double terminal_weight = 50.0;
};

struct ControlProblem {
  ProblemKind kind = ProblemKind::PointMass2D;
  int state_dim = 2;
  int control_dim = 2;
  double horizon = 1.0;
  int n_steps = 20;
  Vector init_mean;
  Vector init_std;  // diagonal Gaussian; zero entries are deterministic
  double terminal_weight = 50.0;
  /// PointMass2D only: include the fixed 50 exp(-1.25 |x|^2) obstacle.
  bool fixed_obstacle = true;

  double step() const { return horizon / n_steps; }
  std::string name() const { return to_string(kind); }
};

ControlProblem point_mass_2d();
ControlProblem quadcopter_12d();
ControlProblem bicycle_4d(int n_steps = 50);
/// Canonical problem for a kind; n_steps <= 0 keeps the default.
ControlProblem make_problem(ProblemKind kind, int n_steps = 0);

/// Target-reaching task. Quadcopter targets may be given as 3 positions.
TaskSpec target_task(const ControlProblem& problem, const Vector& target);
/// Bicycle obstacle task with the fixed target (5, 5, pi/4, 0).
TaskSpec obstacle_task(const ControlProblem& problem, std::vector<Obstacle> obstacles);
Vector bicycle_target();

/// Throws DimensionMismatch / Error when the task does not fit the problem.
void validate_task(const ControlProblem& problem, const TaskSpec& task);

namespace detail {

inline void check_dims(const ControlProblem& p, Eigen::Index x, Eigen::Index u) {
  if (x != p.state_dim || (u >= 0 && u != p.control_dim)) {
    throw DimensionMismatch(p.name() + ": expected state " + std::to_string(p.state_dim) +
                            " / control " + std::to_string(p.control_dim) + ", got " +
                            std::to_string(x) + " / " + std::to_string(u));
  }
}

}  // namespace detail

/// State derivative f(x, u). Templated so the trajectory optimizer can
/// instantiate it with ad::Real.
template <typename S>
VectorX<S> dynamics_eval(const ControlProblem& problem, const VectorX<S>& x,
                         const VectorX<S>& u) {
  using std::cos;
  using std::sin;
  using std::tan;
  detail::check_dims(problem, x.size(), u.size());
  VectorX<S> dx(problem.state_dim);
  switch (problem.kind) {
    case ProblemKind::PointMass2D:
      dx = u;
      break;
    case ProblemKind::Bicycle4D: {
      const S& theta = x(2);
      const S& v = x(3);
      dx(0) = v * cos(theta);
      dx(1) = v * sin(theta);
      dx(2) = v / S(kWheelbase) * tan(u(0));
      dx(3) = u(1);
      break;
    }
    case ProblemKind::Quadcopter12D: {
      // x = (px, py, pz, psi, theta, phi, vx, vy, vz, dpsi, dtheta, dphi)
      // u = (thrust, tau_psi, tau_theta, tau_phi)
      const S& psi = x(3);
      const S& th = x(4);
      const S& ph = x(5);
      const S f = u(0) / S(kQuadMass);
      const S spsi = sin(psi), cpsi = cos(psi);
      const S sth = sin(th), cth = cos(th);
      const S sph = sin(ph), cph = cos(ph);
      for (int i = 0; i < 6; ++i) dx(i) = x(6 + i);
      dx(6) = f * (spsi * sph + cpsi * sth * cph);
      dx(7) = f * (-cpsi * sph + spsi * sth * cph);
      dx(8) = f * cth * cph - S(kGravity);
      dx(9) = u(1);
      dx(10) = u(2);
      dx(11) = u(3);
      break;
    }
  }
  return dx;
}

/// 1/2 |u|^2.
template <typename S>
S control_cost_rate(const VectorX<S>& u) {
  S acc(0.0);
  for (Eigen::Index i = 0; i < u.size(); ++i) acc += u(i) * u(i);
  return S(0.5) * acc;
}

/// State penalty Q(x): the fixed PointMass2D obstacle or the task's
/// Gaussian obstacles on the bicycle position; zero for the quadcopter.
template <typename S>
S obstacle_cost_rate(const ControlProblem& problem, const TaskSpec& task, const VectorX<S>& x) {
  using std::exp;
  detail::check_dims(problem, x.size(), -1);
  switch (problem.kind) {
    case ProblemKind::PointMass2D: {
      if (!problem.fixed_obstacle) return S(0.0);
      const S r2 = x(0) * x(0) + x(1) * x(1);
      return S(50.0) * exp(S(-1.25) * r2);
    }
    case ProblemKind::Bicycle4D: {
      S acc(0.0);
      for (const auto& ob : task.obstacles) {
        const S dx = x(0) - S(ob.center(0));
        const S dy = x(1) - S(ob.center(1));
        acc += S(ob.amplitude) * exp(-(dx * dx + dy * dy) / S(2.0 * ob.sigma * ob.sigma));
      }
      return acc;
    }
    case ProblemKind::Quadcopter12D:
      return S(0.0);
  }
  return S(0.0);
}

template <typename S>
S running_cost(const ControlProblem& problem, const TaskSpec& task, const VectorX<S>& x,
               const VectorX<S>& u) {
  detail::check_dims(problem, x.size(), u.size());
  return control_cost_rate(u) + obstacle_cost_rate(problem, task, x);
}

/// terminal_weight * |x_T - y|^2 over all state components.
template <typename S>
S terminal_cost(const ControlProblem& problem, const TaskSpec& task, const VectorX<S>& x) {
  detail::check_dims(problem, x.size(), -1);
  if (task.target.size() != problem.state_dim) {
    throw DimensionMismatch("terminal_cost: target has " + std::to_string(task.target.size()) +
                            " entries");
  }
  S acc(0.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const S d = x(i) - S(task.target(i));
    acc += d * d;
  }
  return S(task.terminal_weight) * acc;
}

/// Time grid, states and piecewise-constant controls of one rollout.
struct Trajectory {
  Vector times;         // n_steps + 1
  DenseMatrix states;   // (n_steps + 1) x n
  DenseMatrix controls; // n_steps x m
  double objective = 0.0;
  bool converged = true;
  double grad_norm = 0.0;
};

using ControlFn = std::function<Vector(const Vector& x, double t)>;

/// Rolls the dynamics forward with RK4, holding control_fn(x_k, t_k) over
/// each step. Throws NonFiniteState when the state blows up.
Trajectory rk4_rollout(const ControlProblem& problem, const Vector& x0, const ControlFn& control_fn);

Vector sample_initial_state(const ControlProblem& problem, std::mt19937_64& rng);
Vector sample_initial_state(const ControlProblem& problem, std::uint64_t seed);

/// Deterministic 64-bit mixing used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace feoc
