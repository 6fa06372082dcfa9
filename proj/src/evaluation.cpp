#include "feoc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "feoc/errors.hpp"

namespace feoc {

std::string to_string(InferenceMethod m) { return m == InferenceMethod::LS ? "ls" : "operator"; }

InferenceMethod inference_method_from_string(const std::string& name) {
  if (name == "ls" || name == "LS") return InferenceMethod::LS;
  if (name == "operator") return InferenceMethod::Operator;
  throw Error("unknown inference method '" + name + "'");
}

Trajectory rollout_policy(const ControlProblem& problem, const TaskSpec& task,
                          const BasisSet& basis, const Vector& c, const Vector& x0,
                          Quadrature quadrature) {
  if (c.size() != basis.basis_count() || !c.allFinite()) {
    throw DimensionMismatch("rollout_policy: coefficient vector must be finite of length " +
                            std::to_string(basis.basis_count()));
  }
  Trajectory traj = rk4_rollout(problem, x0, [&](const Vector& x, double t) {
    return policy_eval(basis, c, x, t);
  });
  traj.objective = discretized_objective(problem, task, traj.controls, x0, quadrature);
  return traj;
}

double terminal_deviation(const ControlProblem& problem, const TaskSpec& task,
                          const Trajectory& traj) {
  const int pos = problem.kind == ProblemKind::Quadcopter12D ? 3 : 2;
  const Vector xT = traj.states.row(traj.states.rows() - 1).transpose();
  return (xT.head(pos) - task.target.head(pos)).norm();
}

Vector eval_initial_state(const ControlProblem& problem, std::uint64_t seed,
                          std::size_t task_index, int index) {
  return sample_initial_state(
      problem, mix_seed(mix_seed(seed, 0xe7a1 + task_index), static_cast<std::uint64_t>(index)));
}

namespace {

struct OracleBatch {
  std::vector<Vector> x0;
  std::vector<Trajectory> trajectories;
};

}  // namespace

EvalReport evaluate_plan(const ControlProblem& problem, const BasisSet& basis,
                         const OperatorNet* op, const EvalPlan& plan,
                         std::vector<RowTrajectories>* trajectories) {
  EvalReport report;
  if (plan.n_init < 1 || plan.budget < 1) throw Error("evaluate_plan: n_init and budget >= 1");
  for (auto m : plan.methods) {
    if (m == InferenceMethod::Operator && op == nullptr) {
      throw Error("evaluate_plan: operator method requested without an operator network");
    }
  }
  const Quadrature quad = plan.solver.quadrature;
  for (std::size_t ti = 0; ti < plan.tasks.size(); ++ti) {
    const EvalTask& et = plan.tasks[ti];
    validate_task(problem, et.task);
    OracleBatch oracle;
    oracle.x0.resize(static_cast<std::size_t>(plan.n_init));
    oracle.trajectories.resize(static_cast<std::size_t>(plan.n_init));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < plan.n_init; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      oracle.x0[idx] = eval_initial_state(problem, plan.seed, ti, i);
      oracle.trajectories[idx] = solve_open_loop(problem, et.task, oracle.x0[idx], plan.solver);
    }
    for (InferenceMethod method : plan.methods) {
      const auto t0 = std::chrono::steady_clock::now();
      CoefficientVector coeffs;
      if (method == InferenceMethod::LS) {
        const std::uint64_t data_seed = mix_seed(mix_seed(plan.seed, 0x15da7a), ti);
        const DatagenResult data =
            generate_task_dataset(problem, et.task, plan.budget, data_seed, plan.solver);
        coeffs = infer_coefficients_ls(basis, data.dataset, basis.lambda_tik);
      } else {
        coeffs = operator_infer(*op, basis, et.task);
      }
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      EvalRow row;
      row.task_id = et.id;
      row.group = et.group;
      row.method = method;
      row.n_rollouts = plan.n_init;
      row.inference_seconds = seconds;
      RowTrajectories rt;
      rt.task_id = et.id;
      rt.group = et.group;
      rt.method = method;
      rt.task = et.task;
      for (int i = 0; i < plan.n_init; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const Vector& x0 = oracle.x0[idx];
        const Trajectory& truth = oracle.trajectories[idx];
        Trajectory fe;
        try {
          fe = rollout_policy(problem, et.task, basis, coeffs.c, x0, quad);
        } catch (const NonFiniteState&) {
          // Diverged rollouts are charged the zero-control objective.
          ++row.diverged;
          fe = trajectory_from_controls(problem, et.task, x0,
                                        DenseMatrix::Zero(problem.n_steps, problem.control_dim),
                                        quad);
        }
        const CostBreakdown fc = cost_breakdown(problem, et.task, fe, quad);
        const CostBreakdown oc = cost_breakdown(problem, et.task, truth, quad);
        row.true_objective += truth.objective;
        row.predicted_objective += fe.objective;
        row.control_cost += fc.control;
        row.obstacle_cost += fc.obstacle;
        row.terminal_cost += fc.terminal;
        row.terminal_deviation += terminal_deviation(problem, et.task, fe);
        row.oracle_control_cost += oc.control;
        row.oracle_obstacle_cost += oc.obstacle;
        row.oracle_terminal_deviation += terminal_deviation(problem, et.task, truth);
        if (trajectories != nullptr) {
          rt.oracle.push_back(truth);
          rt.policy.push_back(std::move(fe));
        }
      }
      const double inv = 1.0 / plan.n_init;
      for (double* v : {&row.true_objective, &row.predicted_objective, &row.control_cost,
                        &row.obstacle_cost, &row.terminal_cost, &row.terminal_deviation,
                        &row.oracle_control_cost, &row.oracle_obstacle_cost,
                        &row.oracle_terminal_deviation}) {
        *v *= inv;
      }
      report.rows.push_back(row);
      if (trajectories != nullptr) trajectories->push_back(std::move(rt));
    }
  }
  return report;
}

std::vector<GroupSummary> summarize(const EvalReport& report) {
  std::vector<GroupSummary> out;
  for (const auto& r : report.rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const GroupSummary& g) {
      return g.group == r.group && g.method == r.method;
    });
    if (it == out.end()) {
      GroupSummary g;
      g.group = r.group;
      g.method = r.method;
      out.push_back(g);
      it = out.end() - 1;
    }
    ++it->tasks;
    it->true_objective += r.true_objective;
    it->predicted_objective += r.predicted_objective;
    it->control_cost += r.control_cost;
    it->obstacle_cost += r.obstacle_cost;
    it->terminal_deviation += r.terminal_deviation;
    it->oracle_control_cost += r.oracle_control_cost;
    it->oracle_obstacle_cost += r.oracle_obstacle_cost;
    it->oracle_terminal_deviation += r.oracle_terminal_deviation;
  }
  for (auto& g : out) {
    const double inv = 1.0 / g.tasks;
    for (double* v : {&g.true_objective, &g.predicted_objective, &g.control_cost,
                      &g.obstacle_cost, &g.terminal_deviation, &g.oracle_control_cost,
                      &g.oracle_obstacle_cost, &g.oracle_terminal_deviation}) {
      *v *= inv;
    }
  }
  return out;
}

std::vector<std::string> worst_case_select(const EvalReport& report, std::size_t k) {
  if (report.rows.empty()) throw Error("worst_case_select: empty report");
  std::vector<const EvalRow*> rows;
  for (const auto& r : report.rows) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const EvalRow* a, const EvalRow* b) {
    if (a->gap() != b->gap()) return a->gap() > b->gap();
    return a->task_id < b->task_id;
  });
  std::vector<std::string> ids;
  for (const EvalRow* r : rows) {
    if (ids.size() == k) break;
    if (std::find(ids.begin(), ids.end(), r->task_id) == ids.end()) ids.push_back(r->task_id);
  }
  return ids;
}

std::vector<std::string> oracle_dominance_violations(const EvalReport& report, double slack) {
  std::vector<std::string> bad;
  for (const auto& r : report.rows) {
    if (r.predicted_objective < r.true_objective * (1.0 - slack)) {
      bad.push_back(r.task_id + "/" + to_string(r.method));
    }
  }
  return bad;
}

}  // namespace feoc
