#include "feoc/operator_net.hpp"

#include <algorithm>
#include <cmath>

#include "feoc/adam.hpp"
#include "feoc/errors.hpp"
#include "feoc/io.hpp"

namespace feoc {

int eta_dim(ProblemKind problem) {
  switch (problem) {
    case ProblemKind::PointMass2D: return 2;
    case ProblemKind::Quadcopter12D: return 3;
    case ProblemKind::Bicycle4D: break;
  }
  throw UnsupportedTaskKind("operator inference is only defined for target tasks");
}

Vector encode_eta(const TaskSpec& task, const EtaBox& box) {
  if (task.kind != TaskKind::Target) {
    throw UnsupportedTaskKind("encode_eta: " + to_string(task.kind) +
                              " tasks have no compact parameterization");
  }
  const int d = box.dim();
  if (box.hi.size() != d || task.target.size() < d) {
    throw DimensionMismatch("encode_eta: box/target dimension mismatch");
  }
  Vector eta(d);
  for (int i = 0; i < d; ++i) {
    const double width = box.hi(i) - box.lo(i);
    eta(i) = (task.target(i) - box.lo(i)) / (width > 0.0 ? width : 1.0);
  }
  return eta;
}

EtaBox eta_box_for(ProblemKind problem, const std::vector<TaskSpec>& tasks) {
  const int d = eta_dim(problem);
  if (tasks.empty()) throw Error("eta_box_for: no tasks");
  EtaBox box;
  box.lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
  box.hi = Vector::Constant(d, -std::numeric_limits<double>::infinity());
  for (const auto& t : tasks) {
    if (t.kind != TaskKind::Target) throw UnsupportedTaskKind("eta_box_for: non-target task");
    box.lo = box.lo.cwiseMin(t.target.head(d));
    box.hi = box.hi.cwiseMax(t.target.head(d));
  }
  for (int i = 0; i < d; ++i) {
    if (!(box.hi(i) > box.lo(i))) box.hi(i) = box.lo(i) + 1.0;
  }
  return box;
}

Vector OperatorNet::apply(const Vector& eta) const {
  const DenseMatrix raw = mlp_forward(params, eta);  // p x 1
  return output_shift + output_scale.cwiseProduct(raw.col(0));
}

void validate(const OperatorTrainConfig& config) {
  if (!(config.beta > 0.0)) throw Error("operator config: beta must be > 0");
  if (config.steps < 0) throw Error("operator config: steps must be >= 0");
  for (int h : config.hidden)
    if (h < 1) throw Error("operator config: hidden widths must be >= 1");
}

OperatorTrainResult operator_train(const BasisSet& basis, const std::vector<TaskDataset>& pairs,
                                   const OperatorTrainConfig& config, bool allow_single) {
  validate(config);
  if (pairs.size() < (allow_single ? 1u : 2u)) {
    throw Error("operator_train: need at least two task/dataset pairs");
  }
  const int p = basis.basis_count();
  const int d = eta_dim(basis.problem);

  OperatorTrainResult result;
  std::vector<TaskSpec> tasks;
  for (const auto& ds : pairs) {
    tasks.push_back(ds.task);
    result.targets.push_back(infer_coefficients_ls(basis, ds, basis.lambda_tik).c);
  }
  const auto n_tasks = static_cast<Eigen::Index>(pairs.size());

  OperatorNet net;
  net.problem = basis.problem;
  net.box = eta_box_for(basis.problem, tasks);
  net.basis_checksum = basis_checksum(basis);
  std::vector<int> widths{d};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  net.params = mlp_init(widths, config.activation, p, 1, config.seed);

  DenseMatrix eta(n_tasks, d);
  DenseMatrix target(n_tasks, p);
  for (Eigen::Index k = 0; k < n_tasks; ++k) {
    eta.row(k) = encode_eta(tasks[static_cast<std::size_t>(k)], net.box).transpose();
    target.row(k) = result.targets[static_cast<std::size_t>(k)].transpose();
  }
  // Standardize the regression targets per coefficient.
  net.output_shift = target.colwise().mean().transpose();
  net.output_scale = Vector::Ones(p);
  if (n_tasks > 1) {
    for (int j = 0; j < p; ++j) {
      const double var =
          (target.col(j).array() - net.output_shift(j)).square().sum() / static_cast<double>(n_tasks);
      const double sd = std::sqrt(var);
      net.output_scale(j) = sd > 1e-12 ? sd : 1.0;
    }
  }
  DenseMatrix scaled = target;
  scaled.rowwise() -= net.output_shift.transpose();
  scaled.array().rowwise() /= net.output_scale.transpose().array();

  Vector gamma = net.params.flatten();
  AdamState adam = adam_init(gamma.size(), config.beta);
  const DenseMatrix weights = net.output_scale.cwiseAbs2().transpose().replicate(n_tasks, 1);
  ad::Tape tape;
  auto loss_at = [&](bool with_grad, Vector* grad) {
    tape.clear();
    const MlpVariables vars = record_variables(tape, net.params);
    const ad::Expr out = mlp_forward(vars, net.params.activation, tape.constant(eta));
    // Mean over tasks of |c - psi(eta)|^2 in original coefficient units.
    const ad::Expr diff = out - tape.constant(scaled);
    const ad::Expr loss = (1.0 / static_cast<double>(n_tasks)) *
                          ad::sum(ad::hadamard(ad::hadamard(diff, diff), tape.constant(weights)));
    if (with_grad) *grad = flatten_gradients(tape.grad(loss));
    return loss.scalar();
  };
  Vector grad;
  for (int step = 0; step < config.steps; ++step) {
    const double value = loss_at(true, &grad);
    if (!std::isfinite(value)) {
      throw DivergedTraining("operator_train: loss became non-finite at step " +
                             std::to_string(step));
    }
    result.loss_curve.push_back(value);
    adam_step(gamma, grad, adam);
    net.params.assign(gamma);
  }
  result.final_loss = loss_at(false, nullptr);
  result.net = std::move(net);
  return result;
}

CoefficientVector operator_infer(const OperatorNet& net, const BasisSet& basis,
                                 const TaskSpec& task) {
  if (net.basis_checksum != basis_checksum(basis)) {
    throw BasisMismatch("operator network is bound to a different basis checkpoint");
  }
  CoefficientVector out;
  out.c = net.apply(encode_eta(task, net.box));
  out.source = CoefficientSource::Operator;
  out.task = task;
  return out;
}

}  // namespace feoc
