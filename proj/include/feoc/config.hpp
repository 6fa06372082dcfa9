#pragma once

// Experiment configuration. The file format is JSON; every object is checked
// against a fixed key set and errors name the offending key path, e.g.
// "fe.steps" or "eval.groups[1].tasks".

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "feoc/evaluation.hpp"
#include "feoc/function_encoder.hpp"
#include "feoc/operator_net.hpp"
#include "feoc/trajopt.hpp"

namespace feoc {

/// A set of tasks, written in one of four forms:
///   {"targets": [[1, 1], [2, 1.5]]}
///   {"grid": {"lo": [1, 1], "hi": [2, 2], "counts": [3, 3]}}
///   {"obstacles": [[{"A": 30, "mu": [2, 2], "sigma": 0.5}], ...]}
///   {"random_obstacles": {"count": 36, "per_task": 1, "amplitudes": [30, 40, 50],
///                         "centers": [1, 2, 3, 4], "sigmas": [0.3, 0.5, 0.7], "seed": 1}}
struct TaskSetSpec {
  std::vector<TaskSpec> tasks;
};

struct EvalGroupSpec {
  std::string tag;
  std::vector<TaskSpec> tasks;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::PointMass2D;
  int n_steps = 0;  // 0 keeps the problem default
  std::uint64_t seed = 0;
  std::filesystem::path out = "run";
  SolveOptions solver;
  std::vector<TaskSpec> train_tasks;
  int n_traj = 40;
  FeTrainConfig fe;
  OperatorTrainConfig op;
  std::vector<InferenceMethod> eval_methods{InferenceMethod::LS};
  int eval_n_init = 10;
  int eval_budget = 1;
  std::vector<EvalGroupSpec> eval_groups;
  std::optional<std::filesystem::path> basis_checkpoint;
  std::optional<std::filesystem::path> operator_checkpoint;

  ControlProblem make_problem() const;
  /// Flattens the eval groups into a plan with ids "<tag>-<index>".
  EvalPlan eval_plan() const;
};

/// Parses and validates; throws ConfigError naming the field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration (after CLI overrides).
std::string canonical_json(const ExperimentConfig& config);

/// FNV-1a 64 of canonical_json.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Desk-scale defaults for each benchmark, as JSON text.
std::string default_config_json(ProblemKind problem);
ExperimentConfig default_config(ProblemKind problem);

/// Validation shared by parse_config and CLI overrides.
void validate(const ExperimentConfig& config);

}  // namespace feoc
