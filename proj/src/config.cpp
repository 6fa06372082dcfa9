#include "feoc/config.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <json.hpp>

#include "feoc/errors.hpp"
#include "feoc/io.hpp"

namespace feoc {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(join(path, item.key()), "unknown key");
    }
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
  return v;
}

long long get_int(const json& j, const std::string& path, long long lo) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo) throw ConfigError(path, "must be >= " + std::to_string(lo));
  return v;
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  return static_cast<std::uint64_t>(get_int(j, path, 0));
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

Vector get_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], index(path, i));
  return v;
}

std::vector<int> get_widths(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of widths");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(static_cast<int>(get_int(j[i], index(path, i), 1)));
  return out;
}

Activation get_activation(const json& j, const std::string& path) {
  try {
    return activation_from_string(get_string(j, path));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

ProblemKind parse_problem_name(const std::string& name, const std::string& path) {
  static const std::pair<const char*, ProblemKind> aliases[] = {
      {"PointMass2D", ProblemKind::PointMass2D},   {"point_mass_2d", ProblemKind::PointMass2D},
      {"pm2d", ProblemKind::PointMass2D},          {"Quadcopter12D", ProblemKind::Quadcopter12D},
      {"quadcopter_12d", ProblemKind::Quadcopter12D}, {"quad", ProblemKind::Quadcopter12D},
      {"Bicycle4D", ProblemKind::Bicycle4D},       {"bicycle_4d", ProblemKind::Bicycle4D},
      {"bicycle", ProblemKind::Bicycle4D},
  };
  for (const auto& [alias, kind] : aliases) {
    if (name == alias) return kind;
  }
  throw ConfigError(path, "unknown problem '" + name + "'");
}

Obstacle parse_obstacle(const json& j, const std::string& path) {
  check_keys(j, path, {"A", "mu", "sigma"});
  for (const char* k : {"A", "mu", "sigma"}) {
    if (!j.contains(k)) throw ConfigError(join(path, k), "missing");
  }
  Obstacle o;
  o.amplitude = positive(j["A"], join(path, "A"));
  const Vector mu = get_vector(j["mu"], join(path, "mu"));
  if (mu.size() != 2) throw ConfigError(join(path, "mu"), "expected 2 entries");
  o.center = mu;
  o.sigma = positive(j["sigma"], join(path, "sigma"));
  return o;
}

TaskSpec checked(const ControlProblem& problem, TaskSpec task, const std::string& path) {
  try {
    validate_task(problem, task);
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  return task;
}

std::vector<TaskSpec> grid_tasks(const ControlProblem& problem, const json& j,
                                 const std::string& path) {
  check_keys(j, path, {"lo", "hi", "counts"});
  for (const char* k : {"lo", "hi", "counts"}) {
    if (!j.contains(k)) throw ConfigError(join(path, k), "missing");
  }
  const Vector lo = get_vector(j["lo"], join(path, "lo"));
  const Vector hi = get_vector(j["hi"], join(path, "hi"));
  const json& counts_j = j["counts"];
  if (!counts_j.is_array() || counts_j.size() != static_cast<std::size_t>(lo.size())) {
    throw ConfigError(join(path, "counts"), "expected one count per dimension");
  }
  if (hi.size() != lo.size()) throw ConfigError(join(path, "hi"), "length differs from lo");
  std::vector<int> counts;
  for (std::size_t i = 0; i < counts_j.size(); ++i) {
    counts.push_back(static_cast<int>(get_int(counts_j[i], index(join(path, "counts"), i), 1)));
  }
  std::vector<TaskSpec> out;
  std::vector<int> idx(counts.size(), 0);
  while (true) {
    Vector y(lo.size());
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
      const int n = counts[static_cast<std::size_t>(d)];
      const double frac = n == 1 ? 0.0 : static_cast<double>(idx[static_cast<std::size_t>(d)]) / (n - 1);
      y(d) = lo(d) + frac * (hi(d) - lo(d));
    }
    try {
      out.push_back(checked(problem, target_task(problem, y), path));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(path, e.what());
    }
    // Last coordinate varies fastest.
    std::size_t d = counts.size();
    while (d > 0) {
      --d;
      if (++idx[d] < counts[d]) break;
      idx[d] = 0;
      if (d == 0) return out;
    }
  }
}

std::vector<TaskSpec> random_obstacle_tasks(const ControlProblem& problem, const json& j,
                                            const std::string& path) {
  check_keys(j, path, {"count", "per_task", "amplitudes", "centers", "sigmas", "seed"});
  for (const char* k : {"count", "amplitudes", "centers", "sigmas"}) {
    if (!j.contains(k)) throw ConfigError(join(path, k), "missing");
  }
  const auto count = get_int(j["count"], join(path, "count"), 1);
  const auto per_task = j.contains("per_task") ? get_int(j["per_task"], join(path, "per_task"), 1) : 1;
  if (per_task > 2) throw ConfigError(join(path, "per_task"), "must be 1 or 2");
  const Vector amps = get_vector(j["amplitudes"], join(path, "amplitudes"));
  const Vector centers = get_vector(j["centers"], join(path, "centers"));
  const Vector sigmas = get_vector(j["sigmas"], join(path, "sigmas"));
  if (per_task == 2 && centers.size() < 2) {
    throw ConfigError(join(path, "centers"), "two obstacles need at least two center values");
  }
  const std::uint64_t seed = j.contains("seed") ? get_seed(j["seed"], join(path, "seed")) : 0;
  std::mt19937_64 rng(mix_seed(seed, 0x0b57));
  auto pick = [&](const Vector& v) { return v(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(v.size()))); };
  std::vector<TaskSpec> out;
  for (long long i = 0; i < count; ++i) {
    std::vector<Obstacle> obs;
    while (static_cast<long long>(obs.size()) < per_task) {
      Obstacle o{pick(amps), Eigen::Vector2d(pick(centers), pick(centers)), pick(sigmas)};
      const bool clash = std::any_of(obs.begin(), obs.end(), [&](const Obstacle& q) {
        return (q.center - o.center).norm() == 0.0;
      });
      if (!clash) obs.push_back(o);
    }
    out.push_back(checked(problem, obstacle_task(problem, obs), index(path, static_cast<std::size_t>(i))));
  }
  return out;
}

std::vector<TaskSpec> parse_task_set(const ControlProblem& problem, const json& j,
                                     const std::string& path) {
  check_keys(j, path, {"targets", "grid", "obstacles", "random_obstacles"});
  if (j.size() != 1) throw ConfigError(path, "expected exactly one of targets, grid, obstacles, random_obstacles");
  std::vector<TaskSpec> out;
  if (j.contains("targets")) {
    const std::string p = join(path, "targets");
    const json& list = j["targets"];
    if (!list.is_array() || list.empty()) throw ConfigError(p, "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Vector y = get_vector(list[i], index(p, i));
      try {
        out.push_back(checked(problem, target_task(problem, y), index(p, i)));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(index(p, i), e.what());
      }
    }
  } else if (j.contains("grid")) {
    out = grid_tasks(problem, j["grid"], join(path, "grid"));
  } else if (j.contains("obstacles")) {
    const std::string p = join(path, "obstacles");
    const json& list = j["obstacles"];
    if (!list.is_array() || list.empty()) throw ConfigError(p, "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_array()) throw ConfigError(index(p, i), "expected an array of obstacles");
      std::vector<Obstacle> obs;
      for (std::size_t k = 0; k < list[i].size(); ++k) {
        obs.push_back(parse_obstacle(list[i][k], index(index(p, i), k)));
      }
      try {
        out.push_back(checked(problem, obstacle_task(problem, obs), index(p, i)));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(index(p, i), e.what());
      }
    }
  } else {
    out = random_obstacle_tasks(problem, j["random_obstacles"], join(path, "random_obstacles"));
  }
  return out;
}

json task_set_json(const std::vector<TaskSpec>& tasks) {
  json j = json::object();
  if (!tasks.empty() && tasks.front().kind != TaskKind::Target) {
    json list = json::array();
    for (const auto& t : tasks) {
      json obs = json::array();
      for (const auto& o : t.obstacles) {
        obs.push_back({{"A", o.amplitude}, {"mu", {o.center.x(), o.center.y()}}, {"sigma", o.sigma}});
      }
      list.push_back(obs);
    }
    j["obstacles"] = list;
  } else {
    json list = json::array();
    for (const auto& t : tasks) list.push_back(std::vector<double>(t.target.data(), t.target.data() + t.target.size()));
    j["targets"] = list;
  }
  return j;
}

void parse_solver(const json& j, SolveOptions& s) {
  const std::string path = "solver";
  check_keys(j, path, {"method", "max_iters", "grad_tol", "learning_rate", "lbfgs_memory",
                       "n_starts", "quadrature"});
  if (j.contains("method")) {
    const auto m = get_string(j["method"], "solver.method");
    if (m == "lbfgs") s.method = SolverMethod::Lbfgs;
    else if (m == "adam") s.method = SolverMethod::Adam;
    else throw ConfigError("solver.method", "expected lbfgs or adam");
  }
  if (j.contains("max_iters")) s.max_iters = static_cast<int>(get_int(j["max_iters"], "solver.max_iters", 1));
  if (j.contains("grad_tol")) s.grad_tol = positive(j["grad_tol"], "solver.grad_tol");
  if (j.contains("learning_rate")) s.learning_rate = positive(j["learning_rate"], "solver.learning_rate");
  if (j.contains("lbfgs_memory")) s.lbfgs_memory = static_cast<int>(get_int(j["lbfgs_memory"], "solver.lbfgs_memory", 1));
  if (j.contains("n_starts")) s.n_starts = static_cast<int>(get_int(j["n_starts"], "solver.n_starts", 1));
  if (j.contains("quadrature")) {
    const auto q = get_string(j["quadrature"], "solver.quadrature");
    if (q == "left") s.quadrature = Quadrature::Left;
    else if (q == "trapezoid") s.quadrature = Quadrature::Trapezoid;
    else throw ConfigError("solver.quadrature", "expected left or trapezoid");
  }
}

void parse_fe(const json& j, FeTrainConfig& fe) {
  check_keys(j, "fe", {"p", "hidden", "activation", "lambda_basis", "lambda_tik", "alpha", "steps",
                       "batch", "samples", "seed", "detach_coefficients", "normalize_inputs"});
  if (j.contains("p")) fe.p = static_cast<int>(get_int(j["p"], "fe.p", 1));
  if (j.contains("hidden")) fe.hidden = get_widths(j["hidden"], "fe.hidden");
  if (j.contains("activation")) fe.activation = get_activation(j["activation"], "fe.activation");
  if (j.contains("lambda_basis")) {
    fe.lambda_basis = get_number(j["lambda_basis"], "fe.lambda_basis");
    if (fe.lambda_basis < 0) throw ConfigError("fe.lambda_basis", "must be >= 0");
  }
  if (j.contains("lambda_tik")) fe.lambda_tik = positive(j["lambda_tik"], "fe.lambda_tik");
  if (j.contains("alpha")) fe.alpha = positive(j["alpha"], "fe.alpha");
  if (j.contains("steps")) fe.steps = static_cast<int>(get_int(j["steps"], "fe.steps", 0));
  if (j.contains("batch")) fe.batch = static_cast<int>(get_int(j["batch"], "fe.batch", 0));
  if (j.contains("samples")) fe.samples = static_cast<int>(get_int(j["samples"], "fe.samples", 1));
  if (j.contains("seed")) fe.seed = get_seed(j["seed"], "fe.seed");
  if (j.contains("detach_coefficients")) fe.detach_coefficients = get_bool(j["detach_coefficients"], "fe.detach_coefficients");
  if (j.contains("normalize_inputs")) fe.normalize_inputs = get_bool(j["normalize_inputs"], "fe.normalize_inputs");
}

void parse_operator(const json& j, OperatorTrainConfig& op) {
  check_keys(j, "operator", {"beta", "steps", "seed", "hidden", "activation"});
  if (j.contains("beta")) op.beta = positive(j["beta"], "operator.beta");
  if (j.contains("steps")) op.steps = static_cast<int>(get_int(j["steps"], "operator.steps", 0));
  if (j.contains("seed")) op.seed = get_seed(j["seed"], "operator.seed");
  if (j.contains("hidden")) op.hidden = get_widths(j["hidden"], "operator.hidden");
  if (j.contains("activation")) op.activation = get_activation(j["activation"], "operator.activation");
}

void parse_eval(const ControlProblem& problem, const json& j, ExperimentConfig& c) {
  check_keys(j, "eval", {"methods", "n_init", "budget", "groups"});
  if (j.contains("methods")) {
    const json& m = j["methods"];
    if (!m.is_array() || m.empty()) throw ConfigError("eval.methods", "expected a non-empty array");
    c.eval_methods.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto name = get_string(m[i], index("eval.methods", i));
      if (name == "ls") c.eval_methods.push_back(InferenceMethod::LS);
      else if (name == "operator") c.eval_methods.push_back(InferenceMethod::Operator);
      else throw ConfigError(index("eval.methods", i), "expected ls or operator");
    }
  }
  if (j.contains("n_init")) c.eval_n_init = static_cast<int>(get_int(j["n_init"], "eval.n_init", 1));
  if (j.contains("budget")) c.eval_budget = static_cast<int>(get_int(j["budget"], "eval.budget", 1));
  if (j.contains("groups")) {
    const json& g = j["groups"];
    if (!g.is_array()) throw ConfigError("eval.groups", "expected an array");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string p = index("eval.groups", i);
      check_keys(g[i], p, {"tag", "tasks"});
      if (!g[i].contains("tag")) throw ConfigError(join(p, "tag"), "missing");
      if (!g[i].contains("tasks")) throw ConfigError(join(p, "tasks"), "missing");
      EvalGroupSpec spec;
      spec.tag = get_string(g[i]["tag"], join(p, "tag"));
      if (spec.tag.empty()) throw ConfigError(join(p, "tag"), "must not be empty");
      spec.tasks = parse_task_set(problem, g[i]["tasks"], join(p, "tasks"));
      c.eval_groups.push_back(std::move(spec));
    }
  }
}

constexpr const char* kPointMass2DDefault = R"json({
  "problem": {"name": "PointMass2D"},
  "seed": 0,
  "out": "runs/point_mass_2d",
  "solver": {"n_starts": 3},
  "train_tasks": {"grid": {"lo": [1, 1], "hi": [2, 2], "counts": [3, 3]}},
  "n_traj": 40,
  "fe": {"p": 64, "hidden": [128, 128, 128], "steps": 10000, "samples": 256},
  "operator": {"steps": 5000, "hidden": [64, 64, 64]},
  "eval": {
    "methods": ["ls", "operator"],
    "n_init": 10,
    "budget": 10,
    "groups": [
      {"tag": "seen", "tasks": {"targets": [[1, 1], [1.5, 2], [2, 1.5]]}},
      {"tag": "interpolation", "tasks": {"targets": [[1.25, 1.25], [1.75, 1.25], [1.25, 1.75], [1.75, 1.75]]}},
      {"tag": "extrapolation", "tasks": {"targets": [[2.25, 2.25], [2.25, 1.5], [1.5, 2.25]]}}
    ]
  }
}
)json";

constexpr const char* kQuadcopter12DDefault = R"json({
  "problem": {"name": "Quadcopter12D"},
  "seed": 0,
  "out": "runs/quadcopter_12d",
  "solver": {"n_starts": 2},
  "train_tasks": {"grid": {"lo": [1, 1, 1], "hi": [4, 4, 4], "counts": [2, 2, 2]}},
  "n_traj": 40,
  "fe": {"p": 64, "hidden": [128, 128, 128], "steps": 10000, "samples": 256},
  "operator": {"steps": 3000, "hidden": [64, 64, 64]},
  "eval": {
    "methods": ["ls"],
    "n_init": 5,
    "budget": 10,
    "groups": [
      {"tag": "test", "tasks": {"targets": [[2, 2, 2], [3, 3, 3], [2, 3, 2.5], [3, 2, 1.5]]}}
    ]
  }
}
)json";

constexpr const char* kBicycle4DDefault = R"json({
  "problem": {"name": "Bicycle4D"},
  "seed": 0,
  "out": "runs/bicycle_4d",
  "solver": {"n_starts": 3},
  "train_tasks": {"random_obstacles": {"count": 36, "amplitudes": [30, 40, 50], "centers": [1, 2, 3, 4], "sigmas": [0.3, 0.5, 0.7], "seed": 1}},
  "n_traj": 25,
  "fe": {"p": 64, "hidden": [128, 128, 128], "steps": 6000, "batch": 8, "samples": 256},
  "eval": {
    "methods": ["ls"],
    "n_init": 10,
    "budget": 10,
    "groups": [
      {"tag": "test", "tasks": {"random_obstacles": {"count": 8, "amplitudes": [30, 40, 50], "centers": [1, 2, 3, 4], "sigmas": [0.3, 0.5, 0.7], "seed": 2}}}
    ]
  }
}
)json";

}  // namespace

ControlProblem ExperimentConfig::make_problem() const {
  return feoc::make_problem(problem, n_steps);
}

EvalPlan ExperimentConfig::eval_plan() const {
  EvalPlan plan;
  plan.methods = eval_methods;
  plan.n_init = eval_n_init;
  plan.budget = eval_budget;
  plan.seed = mix_seed(seed, 0xe7a1);
  plan.solver = solver;
  for (const auto& g : eval_groups) {
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
      plan.tasks.push_back({g.tag + "-" + std::to_string(i), g.tag, g.tasks[i]});
    }
  }
  return plan;
}

void validate(const ExperimentConfig& c) {
  if (c.n_traj < 1) throw ConfigError("n_traj", "must be >= 1");
  if (c.eval_n_init < 1) throw ConfigError("eval.n_init", "must be >= 1");
  if (c.eval_budget < 1) throw ConfigError("eval.budget", "must be >= 1");
  if (c.n_steps < 0) throw ConfigError("problem.n_steps", "must be >= 0");
  try {
    validate(c.fe);
  } catch (const Error& e) {
    throw ConfigError("fe", e.what());
  }
  try {
    validate(c.op);
  } catch (const Error& e) {
    throw ConfigError("operator", e.what());
  }
  const ControlProblem problem = c.make_problem();
  for (std::size_t i = 0; i < c.train_tasks.size(); ++i) {
    checked(problem, c.train_tasks[i], index("train_tasks", i));
  }
  std::set<std::string> tags;
  for (std::size_t i = 0; i < c.eval_groups.size(); ++i) {
    if (!tags.insert(c.eval_groups[i].tag).second) {
      throw ConfigError(join(index("eval.groups", i), "tag"), "duplicate tag");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  check_keys(j, "", {"problem", "seed", "out", "solver", "train_tasks", "n_traj", "fe", "operator",
                     "eval", "checkpoints"});
  ExperimentConfig c;
  if (!j.contains("problem")) throw ConfigError("problem", "missing");
  const json& pj = j["problem"];
  if (pj.is_string()) {
    c.problem = parse_problem_name(pj.get<std::string>(), "problem");
  } else {
    check_keys(pj, "problem", {"name", "n_steps"});
    if (!pj.contains("name")) throw ConfigError("problem.name", "missing");
    c.problem = parse_problem_name(get_string(pj["name"], "problem.name"), "problem.name");
    if (pj.contains("n_steps")) c.n_steps = static_cast<int>(get_int(pj["n_steps"], "problem.n_steps", 1));
  }
  const ControlProblem problem = c.make_problem();
  if (j.contains("seed")) c.seed = get_seed(j["seed"], "seed");
  if (j.contains("out")) c.out = get_string(j["out"], "out");
  if (j.contains("solver")) parse_solver(j["solver"], c.solver);
  if (j.contains("train_tasks")) c.train_tasks = parse_task_set(problem, j["train_tasks"], "train_tasks");
  if (j.contains("n_traj")) c.n_traj = static_cast<int>(get_int(j["n_traj"], "n_traj", 1));
  if (j.contains("fe")) parse_fe(j["fe"], c.fe);
  if (j.contains("operator")) parse_operator(j["operator"], c.op);
  if (j.contains("eval")) parse_eval(problem, j["eval"], c);
  if (j.contains("checkpoints")) {
    const json& cj = j["checkpoints"];
    check_keys(cj, "checkpoints", {"basis", "operator"});
    if (cj.contains("basis")) c.basis_checkpoint = get_string(cj["basis"], "checkpoints.basis");
    if (cj.contains("operator")) c.operator_checkpoint = get_string(cj["operator"], "checkpoints.operator");
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(text);
}

std::string canonical_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = {{"name", to_string(c.problem)}, {"n_steps", c.make_problem().n_steps}};
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  j["solver"] = {{"method", c.solver.method == SolverMethod::Lbfgs ? "lbfgs" : "adam"},
                 {"max_iters", c.solver.max_iters},
                 {"grad_tol", c.solver.grad_tol},
                 {"learning_rate", c.solver.learning_rate},
                 {"lbfgs_memory", c.solver.lbfgs_memory},
                 {"n_starts", c.solver.n_starts},
                 {"quadrature", c.solver.quadrature == Quadrature::Left ? "left" : "trapezoid"}};
  if (!c.train_tasks.empty()) j["train_tasks"] = task_set_json(c.train_tasks);
  j["n_traj"] = c.n_traj;
  j["fe"] = {{"p", c.fe.p},
             {"hidden", c.fe.hidden},
             {"activation", to_string(c.fe.activation)},
             {"lambda_basis", c.fe.lambda_basis},
             {"lambda_tik", c.fe.lambda_tik},
             {"alpha", c.fe.alpha},
             {"steps", c.fe.steps},
             {"batch", c.fe.batch},
             {"samples", c.fe.samples},
             {"seed", c.fe.seed},
             {"detach_coefficients", c.fe.detach_coefficients},
             {"normalize_inputs", c.fe.normalize_inputs}};
  j["operator"] = {{"beta", c.op.beta},
                   {"steps", c.op.steps},
                   {"seed", c.op.seed},
                   {"hidden", c.op.hidden},
                   {"activation", to_string(c.op.activation)}};
  json methods = json::array();
  for (auto m : c.eval_methods) methods.push_back(to_string(m));
  json groups = json::array();
  for (const auto& g : c.eval_groups) groups.push_back({{"tag", g.tag}, {"tasks", task_set_json(g.tasks)}});
  j["eval"] = {{"methods", methods}, {"n_init", c.eval_n_init}, {"budget", c.eval_budget}, {"groups", groups}};
  json ck = json::object();
  if (c.basis_checkpoint) ck["basis"] = c.basis_checkpoint->string();
  if (c.operator_checkpoint) ck["operator"] = c.operator_checkpoint->string();
  if (!ck.empty()) j["checkpoints"] = ck;
  return j.dump(2);
}

std::string default_config_json(ProblemKind problem) {
  switch (problem) {
    case ProblemKind::PointMass2D: return kPointMass2DDefault;
    case ProblemKind::Quadcopter12D: return kQuadcopter12DDefault;
    case ProblemKind::Bicycle4D: return kBicycle4DDefault;
  }
  throw Error("unknown problem kind");
}

ExperimentConfig default_config(ProblemKind problem) {
  return parse_config(default_config_json(problem));
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  return fnv1a64(canonical_json(config));
}

}  // namespace feoc
