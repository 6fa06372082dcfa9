#include "feoc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "feoc/config.hpp"
#include "feoc/errors.hpp"
#include "feoc/evaluation.hpp"
#include "feoc/io.hpp"
#include "feoc/svg.hpp"
#include "feoc/version.hpp"

namespace feoc {

namespace fs = std::filesystem;
using nlohmann::json;

int threads_from_env() {
  const char* v = std::getenv("FEOC_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("FEOC_THREADS", "expected a positive integer");
  return static_cast<int>(n);
}

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string problem;
  std::optional<int> p;
  std::optional<int> steps;
  std::string method;
  std::optional<int> n_traj;
  std::optional<int> budget;
  std::string basis;
  std::string op;
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ExperimentConfig resolve_config(const Flags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    c = load_config(f.config);
    if (!f.problem.empty()) {
      const ExperimentConfig other = parse_config("{\"problem\": \"" + f.problem + "\"}");
      if (other.problem != c.problem) throw ConfigError("problem", "--problem conflicts with the config file");
    }
  } else if (!f.problem.empty()) {
    ProblemKind kind;
    try {
      kind = parse_config("{\"problem\": \"" + f.problem + "\"}").problem;
    } catch (const ConfigError& e) {
      throw ConfigError("problem", e.what());
    }
    c = default_config(kind);
  } else {
    throw ConfigError("problem", "missing; pass --config or --problem");
  }
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  if (f.p) c.fe.p = *f.p;
  if (f.n_traj) c.n_traj = *f.n_traj;
  if (f.budget) c.eval_budget = *f.budget;
  if (!f.method.empty()) {
    if (f.method == "ls") c.eval_methods = {InferenceMethod::LS};
    else if (f.method == "operator") c.eval_methods = {InferenceMethod::Operator};
    else throw ConfigError("method", "expected ls or operator");
  }
  if (!f.basis.empty()) c.basis_checkpoint = f.basis;
  if (!f.op.empty()) c.operator_checkpoint = f.op;
  validate(c);
  return c;
}

fs::path data_dir(const ExperimentConfig& c) { return c.out / "data"; }

fs::path basis_path(const ExperimentConfig& c) {
  if (c.basis_checkpoint) {
    if (!fs::exists(*c.basis_checkpoint)) {
      throw ConfigError("checkpoints.basis", "file '" + c.basis_checkpoint->string() + "' does not exist");
    }
    return *c.basis_checkpoint;
  }
  const fs::path p = c.out / "basis.feckpt";
  if (!fs::exists(p)) {
    throw ConfigError("checkpoints.basis",
                      "no basis checkpoint at '" + p.string() + "'; run train-fe or set checkpoints.basis");
  }
  return p;
}

fs::path operator_path(const ExperimentConfig& c) {
  if (c.operator_checkpoint) {
    if (!fs::exists(*c.operator_checkpoint)) {
      throw ConfigError("checkpoints.operator", "file '" + c.operator_checkpoint->string() + "' does not exist");
    }
    return *c.operator_checkpoint;
  }
  const fs::path p = c.out / "operator.feckpt";
  if (!fs::exists(p)) {
    throw ConfigError("checkpoints.operator",
                      "no operator checkpoint at '" + p.string() + "'; run train-op or set checkpoints.operator");
  }
  return p;
}

std::vector<TaskDataset> load_training_data(const ExperimentConfig& c) {
  const fs::path dir = data_dir(c);
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".fedata") files.push_back(e.path());
    }
  }
  if (files.empty()) throw Error("no datasets under '" + dir.string() + "'; run datagen first");
  std::sort(files.begin(), files.end());
  std::vector<TaskDataset> out;
  for (const auto& f : files) out.push_back(load_dataset(f));
  return out;
}

void append_manifest(const ExperimentConfig& c, const std::string& command,
                     const std::vector<std::string>& args, const std::vector<fs::path>& outputs) {
  const fs::path path = c.out / "manifest.json";
  json runs = json::array();
  if (fs::exists(path)) {
    try {
      runs = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw IoError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!runs.is_array()) throw IoError("manifest '" + path.string() + "' is not a JSON array");
  }
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(o.string());
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  runs.push_back({{"command", command},
                  {"args", args},
                  {"version", kVersion},
                  {"config_hash", hex(config_hash(c))},
                  {"seed", c.seed},
                  {"finished", ts.str()},
                  {"outputs", outs},
                  {"config", json::parse(canonical_json(c))}});
  write_file(path, runs.dump(2) + "\n");
}

Provenance provenance(const ExperimentConfig& c, int steps) {
  return {config_hash(c), c.seed, static_cast<std::uint64_t>(steps)};
}

json matrix_json(const DenseMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

DenseMatrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

json task_json(const TaskSpec& t) {
  json obs = json::array();
  for (const auto& o : t.obstacles) {
    obs.push_back({{"A", o.amplitude}, {"mu", {o.center.x(), o.center.y()}}, {"sigma", o.sigma}});
  }
  return {{"kind", to_string(t.kind)},
          {"target", std::vector<double>(t.target.data(), t.target.data() + t.target.size())},
          {"obstacles", obs},
          {"terminal_weight", t.terminal_weight}};
}

TaskSpec task_from_json(const json& j) {
  TaskSpec t;
  const auto kind = j.at("kind").get<std::string>();
  t.kind = kind == "Target" ? TaskKind::Target
           : kind == "SingleObstacle" ? TaskKind::SingleObstacle
                                      : TaskKind::DoubleObstacle;
  const auto y = j.at("target").get<std::vector<double>>();
  t.target = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  for (const auto& o : j.at("obstacles")) {
    const auto mu = o.at("mu").get<std::vector<double>>();
    t.obstacles.push_back({o.at("A").get<double>(), Eigen::Vector2d(mu.at(0), mu.at(1)), o.at("sigma").get<double>()});
  }
  t.terminal_weight = j.at("terminal_weight").get<double>();
  return t;
}

json trajectories_json(const ControlProblem& problem, const std::vector<RowTrajectories>& rows) {
  json out;
  out["problem"] = to_string(problem.kind);
  out["n_steps"] = problem.n_steps;
  out["rows"] = json::array();
  for (const auto& r : rows) {
    json o = json::array(), p = json::array();
    for (const auto& t : r.oracle) o.push_back(matrix_json(t.states));
    for (const auto& t : r.policy) p.push_back(matrix_json(t.states));
    out["rows"].push_back({{"task_id", r.task_id},
                           {"group", r.group},
                           {"method", to_string(r.method)},
                           {"task", task_json(r.task)},
                           {"oracle", o},
                           {"policy", p}});
  }
  return out;
}

std::pair<ControlProblem, std::vector<RowTrajectories>> trajectories_from_json(const json& j) {
  const ControlProblem problem =
      make_problem(problem_kind_from_string(j.at("problem").get<std::string>()), j.at("n_steps").get<int>());
  std::vector<RowTrajectories> rows;
  for (const auto& r : j.at("rows")) {
    RowTrajectories rt;
    rt.task_id = r.at("task_id").get<std::string>();
    rt.group = r.at("group").get<std::string>();
    rt.method = inference_method_from_string(r.at("method").get<std::string>());
    rt.task = task_from_json(r.at("task"));
    for (const auto& s : r.at("oracle")) rt.oracle.push_back(Trajectory{Vector(), matrix_from_json(s), DenseMatrix()});
    for (const auto& s : r.at("policy")) rt.policy.push_back(Trajectory{Vector(), matrix_from_json(s), DenseMatrix()});
    rows.push_back(std::move(rt));
  }
  return {problem, rows};
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream s;
  s << std::setprecision(10);
  s << "task_id,group,method,true_objective,predicted_objective,ratio,control_cost,obstacle_cost,"
       "terminal_cost,terminal_deviation,oracle_control_cost,oracle_obstacle_cost,"
       "oracle_terminal_deviation,n_rollouts,diverged,inference_seconds\n";
  for (const auto& r : report.rows) {
    s << r.task_id << ',' << r.group << ',' << to_string(r.method) << ',' << r.true_objective << ','
      << r.predicted_objective << ',' << r.predicted_objective / r.true_objective << ','
      << r.control_cost << ',' << r.obstacle_cost << ',' << r.terminal_cost << ','
      << r.terminal_deviation << ',' << r.oracle_control_cost << ',' << r.oracle_obstacle_cost
      << ',' << r.oracle_terminal_deviation << ',' << r.n_rollouts << ',' << r.diverged << ','
      << r.inference_seconds << '\n';
  }
  return s.str();
}

std::string report_table(const EvalReport& report) {
  std::ostringstream s;
  s << std::left << std::setw(16) << "group" << std::setw(10) << "method" << std::right
    << std::setw(6) << "tasks" << std::setw(14) << "true J" << std::setw(14) << "predicted J"
    << std::setw(9) << "ratio" << std::setw(12) << "ctrl" << std::setw(12) << "obst"
    << std::setw(12) << "term dev" << std::setw(12) << "oracle dev" << '\n';
  s << std::fixed;
  for (const auto& g : summarize(report)) {
    s << std::left << std::setw(16) << g.group << std::setw(10) << to_string(g.method)
      << std::right << std::setw(6) << g.tasks << std::setprecision(4) << std::setw(14)
      << g.true_objective << std::setw(14) << g.predicted_objective << std::setw(9) << g.ratio()
      << std::setw(12) << g.control_cost << std::setw(12) << g.obstacle_cost
      << std::setprecision(5) << std::setw(12) << g.terminal_deviation << std::setw(12)
      << g.oracle_terminal_deviation << '\n';
  }
  return s.str();
}

class Runner {
 public:
  Runner(const Flags& flags, std::ostream& out, std::ostream& err, std::vector<std::string> args)
      : flags_(flags), out_(out), err_(err), args_(std::move(args)) {}

  int run(const std::string& command) {
    ExperimentConfig c = resolve_config(flags_);
    // Step overrides apply to whichever trainer the command runs.
    if (flags_.steps) {
      if (command == "train-op") c.op.steps = *flags_.steps;
      else c.fe.steps = *flags_.steps;
    }
    validate(c);
    std::vector<fs::path> outputs;
    if (command == "datagen") outputs = datagen(c);
    else if (command == "train-fe") outputs = train_fe(c);
    else if (command == "train-op") outputs = train_op(c);
    else if (command == "infer-ls") outputs = infer(c, InferenceMethod::LS);
    else if (command == "infer-op") outputs = infer(c, InferenceMethod::Operator);
    else if (command == "rollout") outputs = rollout(c);
    else if (command == "eval") outputs = eval(c);
    else if (command == "plot") outputs = plot(c);
    append_manifest(c, command, args_, outputs);
    for (const auto& o : outputs) out_ << o.string() << '\n';
    return 0;
  }

 private:
  std::vector<fs::path> datagen(const ExperimentConfig& c) {
    if (c.train_tasks.empty()) throw ConfigError("train_tasks", "missing; datagen needs a task set");
    const ControlProblem problem = c.make_problem();
    fs::create_directories(data_dir(c));
    std::vector<fs::path> outputs;
    for (std::size_t i = 0; i < c.train_tasks.size(); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const DatagenResult r =
          generate_task_dataset(problem, c.train_tasks[i], c.n_traj, mix_seed(c.seed, i + 1), c.solver);
      char name[32];
      std::snprintf(name, sizeof name, "task_%04zu.fedata", i);
      const fs::path path = data_dir(c) / name;
      save_dataset(r.dataset, path);
      outputs.push_back(path);
      err_ << "datagen: task " << i + 1 << "/" << c.train_tasks.size() << " M=" << r.dataset.size()
           << " unconverged=" << r.unconverged << " ("
           << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)\n";
    }
    return outputs;
  }

  std::vector<fs::path> train_fe(const ExperimentConfig& c) {
    const auto data = load_training_data(c);
    FeTrainConfig cfg = c.fe;
    cfg.seed = mix_seed(c.seed, 0xfe00 + c.fe.seed);
    const int interval = std::max(1, cfg.steps / 20);
    const FeTrainResult r = fe_train(data, cfg, [&](int step, double loss) {
      err_ << "train-fe: step " << step << " loss " << loss << '\n';
    }, interval);
    const fs::path ckpt = c.out / "basis.feckpt";
    save_basis(r.basis, provenance(c, cfg.steps), ckpt);
    std::ostringstream curve;
    curve << std::setprecision(10) << "step,loss\n";
    for (std::size_t i = 0; i < r.loss_curve.size(); ++i) curve << i << ',' << r.loss_curve[i] << '\n';
    const fs::path csv = c.out / "fe_loss.csv";
    write_file(csv, curve.str());
    return {ckpt, csv};
  }

  std::vector<fs::path> train_op(const ExperimentConfig& c) {
    const BasisSet basis = load_basis(basis_path(c)).basis;
    const auto data = load_training_data(c);
    OperatorTrainConfig cfg = c.op;
    cfg.seed = mix_seed(c.seed, 0x0900 + c.op.seed);
    OperatorTrainResult r;
    try {
      r = operator_train(basis, data, cfg);
    } catch (const UnsupportedTaskKind& e) {
      throw ConfigError("problem", e.what());
    }
    err_ << "train-op: final loss " << r.final_loss << '\n';
    const fs::path ckpt = c.out / "operator.feckpt";
    save_operator(r.net, provenance(c, cfg.steps), ckpt);
    std::ostringstream curve;
    curve << std::setprecision(10) << "step,loss\n";
    for (std::size_t i = 0; i < r.loss_curve.size(); ++i) curve << i << ',' << r.loss_curve[i] << '\n';
    const fs::path csv = c.out / "operator_loss.csv";
    write_file(csv, curve.str());
    return {ckpt, csv};
  }

  std::vector<CoefficientVector> coefficients(const ExperimentConfig& c, const BasisSet& basis,
                                              const EvalPlan& plan, InferenceMethod method) {
    const ControlProblem problem = c.make_problem();
    std::optional<OperatorNet> net;
    if (method == InferenceMethod::Operator) net = load_operator(operator_path(c)).net;
    std::vector<CoefficientVector> out;
    for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
      if (method == InferenceMethod::LS) {
        const DatagenResult d = generate_task_dataset(problem, plan.tasks[i].task, plan.budget,
                                                      mix_seed(mix_seed(plan.seed, 0x15da7a), i), plan.solver);
        out.push_back(infer_coefficients_ls(basis, d.dataset, basis.lambda_tik));
      } else {
        out.push_back(operator_infer(*net, basis, plan.tasks[i].task));
      }
    }
    return out;
  }

  EvalPlan require_plan(const ExperimentConfig& c) {
    EvalPlan plan = c.eval_plan();
    if (plan.tasks.empty()) throw ConfigError("eval.groups", "missing; no evaluation tasks configured");
    return plan;
  }

  std::vector<fs::path> infer(const ExperimentConfig& c, InferenceMethod method) {
    const BasisSet basis = load_basis(basis_path(c)).basis;
    const EvalPlan plan = require_plan(c);
    const auto coeffs = coefficients(c, basis, plan, method);
    std::ostringstream s;
    s << std::setprecision(17) << "task_id";
    for (int j = 0; j < basis.basis_count(); ++j) s << ",c" << j;
    s << '\n';
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      s << plan.tasks[i].id;
      for (Eigen::Index j = 0; j < coeffs[i].c.size(); ++j) s << ',' << coeffs[i].c(j);
      s << '\n';
    }
    const fs::path path = c.out / ("coefficients_" + to_string(method) + ".csv");
    fs::create_directories(c.out);
    write_file(path, s.str());
    return {path};
  }

  std::vector<fs::path> rollout(const ExperimentConfig& c) {
    const BasisSet basis = load_basis(basis_path(c)).basis;
    const ControlProblem problem = c.make_problem();
    const EvalPlan plan = require_plan(c);
    const InferenceMethod method = c.eval_methods.front();
    const auto coeffs = coefficients(c, basis, plan, method);
    std::ostringstream s;
    s << std::setprecision(10) << "task_id,rollout,objective,terminal_deviation,diverged\n";
    std::vector<RowTrajectories> rows;
    for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
      RowTrajectories rt{plan.tasks[i].id, plan.tasks[i].group, method, plan.tasks[i].task, {}, {}};
      for (int k = 0; k < plan.n_init; ++k) {
        const Vector x0 = eval_initial_state(problem, plan.seed, i, k);
        try {
          Trajectory tr = rollout_policy(problem, rt.task, basis, coeffs[i].c, x0, plan.solver.quadrature);
          s << rt.task_id << ',' << k << ',' << tr.objective << ','
            << terminal_deviation(problem, rt.task, tr) << ",0\n";
          rt.policy.push_back(std::move(tr));
        } catch (const NonFiniteState&) {
          s << rt.task_id << ',' << k << ",nan,nan,1\n";
        }
      }
      rows.push_back(std::move(rt));
    }
    fs::create_directories(c.out);
    const fs::path csv = c.out / "rollouts.csv";
    const fs::path traj = c.out / "rollout_trajectories.json";
    write_file(csv, s.str());
    write_file(traj, trajectories_json(problem, rows).dump() + "\n");
    return {csv, traj};
  }

  std::vector<fs::path> eval(const ExperimentConfig& c) {
    const fs::path bpath = basis_path(c);
    const bool wants_op = std::find(c.eval_methods.begin(), c.eval_methods.end(),
                                    InferenceMethod::Operator) != c.eval_methods.end();
    const fs::path opath = wants_op ? operator_path(c) : fs::path();
    const EvalPlan plan = require_plan(c);
    const BasisSet basis = load_basis(bpath).basis;
    std::optional<OperatorNet> net;
    if (wants_op) net = load_operator(opath).net;
    const ControlProblem problem = c.make_problem();
    std::vector<RowTrajectories> trajs;
    const EvalReport report = evaluate_plan(problem, basis, net ? &*net : nullptr, plan, &trajs);
    fs::create_directories(c.out);
    const fs::path csv = c.out / "report.csv";
    const fs::path txt = c.out / "report.txt";
    const fs::path js = c.out / "trajectories.json";
    write_file(csv, report_csv(report));
    const std::string table = report_table(report);
    write_file(txt, table);
    write_file(js, trajectories_json(problem, trajs).dump() + "\n");
    out_ << table;
    const auto bad = oracle_dominance_violations(report);
    for (const auto& b : bad) err_ << "warning: policy beat the oracle by more than 1% on " << b << '\n';
    return {csv, txt, js};
  }

  std::vector<fs::path> plot(const ExperimentConfig& c) {
    fs::path src = c.out / "trajectories.json";
    if (!fs::exists(src)) src = c.out / "rollout_trajectories.json";
    if (!fs::exists(src)) throw Error("no trajectories under '" + c.out.string() + "'; run eval first");
    json j;
    try {
      j = json::parse(read_file(src));
    } catch (const json::exception& e) {
      throw IoError("'" + src.string() + "': " + e.what());
    }
    auto [problem, rows] = trajectories_from_json(j);
    return emit_svg_plots(problem, rows, c.out / "plots");
  }

  const Flags& flags_;
  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> args_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Function-encoder optimal control pipeline", "feoc"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"datagen", "Solve training tasks with the trajectory optimizer and store datasets"},
      {"train-fe", "Train the basis functions on the stored datasets"},
      {"train-op", "Train the operator network mapping task parameters to coefficients"},
      {"infer-ls", "Least-squares coefficients for the evaluation tasks"},
      {"infer-op", "Operator-predicted coefficients for the evaluation tasks"},
      {"rollout", "Roll out the inferred policy on the evaluation tasks"},
      {"eval", "Compare policy rollouts against the oracle and write the report"},
      {"plot", "Render SVG trajectory plots from the last eval"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "Experiment config (JSON)");
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--problem", flags.problem, "PointMass2D, Quadcopter12D or Bicycle4D");
    sub->add_option("--p", flags.p, "Number of basis functions")->check(CLI::PositiveNumber);
    sub->add_option("--steps", flags.steps, "Training steps")->check(CLI::NonNegativeNumber);
    sub->add_option("--method", flags.method, "Coefficient inference method")->check(CLI::IsMember({"ls", "operator"}));
    sub->add_option("--n-traj", flags.n_traj, "Trajectories per training task")->check(CLI::PositiveNumber);
    sub->add_option("--budget", flags.budget, "Oracle trajectories for LS inference")->check(CLI::PositiveNumber);
    sub->add_option("--basis", flags.basis, "Basis checkpoint");
    sub->add_option("--operator", flags.op, "Operator checkpoint");
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const int threads = threads_from_env();
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    if (threads > 0) Eigen::setNbThreads(threads);
    Runner runner(flags, out, err, args);
    return runner.run(command);
  } catch (const ConfigError& e) {
    err << "feoc " << command << ": config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "feoc " << command << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace feoc
