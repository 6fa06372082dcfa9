#include "feoc/function_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "feoc/adam.hpp"
#include "feoc/errors.hpp"

namespace feoc {

namespace {

/// (M*m) x p design matrix from head-major network outputs.
DenseMatrix design_matrix(const DenseMatrix& outputs, int m) {
  const Eigen::Index samples = outputs.rows();
  const Eigen::Index p = outputs.cols() / m;
  DenseMatrix f(samples * m, p);
  for (Eigen::Index i = 0; i < samples; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index d = 0; d < m; ++d) f(i * m + d, j) = outputs(i, j * m + d);
  return f;
}

Vector stacked_controls(const DenseMatrix& controls) {
  return Eigen::Map<const Vector>(controls.data(), controls.size());
}

void check_dataset(const BasisSet& basis, const TaskDataset& d) {
  validate_dataset(d);
  if (d.state_dim() + 1 != basis.input_dim() || d.control_dim() != basis.control_dim()) {
    throw DimensionMismatch("dataset (n=" + std::to_string(d.state_dim()) +
                            ", m=" + std::to_string(d.control_dim()) +
                            ") does not match basis input " + std::to_string(basis.input_dim()) +
                            " / heads of dim " + std::to_string(basis.control_dim()));
  }
}

}  // namespace

DenseMatrix BasisSet::normalize(const DenseMatrix& inputs) const {
  if (inputs.cols() != input_dim()) {
    throw ShapeMismatch("basis input has " + std::to_string(inputs.cols()) +
                        " columns, expected " + std::to_string(input_dim()));
  }
  DenseMatrix z = inputs;
  z.rowwise() -= input_shift.transpose();
  z.array().rowwise() /= input_scale.transpose().array();
  return z;
}

DenseMatrix BasisSet::evaluate_batch(const DenseMatrix& inputs) const {
  return mlp_forward_batch(params, normalize(inputs));
}

DenseMatrix BasisSet::evaluate(const Vector& x, double t) const {
  if (x.size() + 1 != input_dim()) {
    throw DimensionMismatch("basis evaluate: state length " + std::to_string(x.size()) +
                            ", expected " + std::to_string(input_dim() - 1));
  }
  DenseMatrix row(1, input_dim());
  row.leftCols(x.size()) = x.transpose();
  row(0, x.size()) = t;
  const DenseMatrix out = evaluate_batch(row);
  return Eigen::Map<const DenseMatrix>(out.data(), basis_count(), control_dim());
}

GramSystem gram_and_rhs(const BasisSet& basis, const TaskDataset& dataset) {
  check_dataset(basis, dataset);
  const double inv_m = 1.0 / static_cast<double>(dataset.size());
  const DenseMatrix f = design_matrix(basis.evaluate_batch(dataset_inputs(dataset)),
                                      basis.control_dim());
  GramSystem g;
  g.gram.noalias() = inv_m * (f.transpose() * f);
  // exact symmetry regardless of GEMM blocking
  g.gram = (0.5 * (g.gram + g.gram.transpose())).eval();
  g.rhs.noalias() = inv_m * (f.transpose() * stacked_controls(dataset.controls));
  return g;
}

CoefficientVector infer_coefficients_ls(const BasisSet& basis, const TaskDataset& dataset,
                                        double lambda_tik) {
  if (!(lambda_tik > 0.0)) throw Error("infer_coefficients_ls: lambda_tik must be > 0");
  const GramSystem sys = gram_and_rhs(basis, dataset);
  double lambda = lambda_tik;
  for (int attempt = 0;; ++attempt) {
    DenseMatrix a = sys.gram;
    a.diagonal().array() += lambda;
    try {
      CoefficientVector out;
      out.c = mat_solve_spd(a, sys.rhs);
      out.source = CoefficientSource::LS;
      out.task = dataset.task;
      return out;
    } catch (const NotPositiveDefinite&) {
      if (attempt == 3) throw;
      lambda *= 10.0;
    }
  }
}

double regularized_ls_loss(const BasisSet& basis, const TaskDataset& dataset, const Vector& c,
                           double lambda_tik) {
  check_dataset(basis, dataset);
  const DenseMatrix f = design_matrix(basis.evaluate_batch(dataset_inputs(dataset)),
                                      basis.control_dim());
  const Vector resid = stacked_controls(dataset.controls) - f * c;
  return resid.squaredNorm() / static_cast<double>(dataset.size()) + lambda_tik * c.squaredNorm();
}

Vector policy_eval(const BasisSet& basis, const Vector& c, const Vector& x, double t) {
  if (c.size() != basis.basis_count()) {
    throw DimensionMismatch("policy_eval: " + std::to_string(c.size()) + " coefficients for " +
                            std::to_string(basis.basis_count()) + " bases");
  }
  const DenseMatrix phi = basis.evaluate(x, t);
  return phi.transpose() * c;
}

void validate(const FeTrainConfig& config) {
  if (config.p < 1) throw Error("fe config: p must be >= 1");
  if (!(config.lambda_tik > 0.0)) throw Error("fe config: lambda_tik must be > 0");
  if (!(config.alpha > 0.0)) throw Error("fe config: alpha must be > 0");
  if (config.lambda_basis < 0.0) throw Error("fe config: lambda_basis must be >= 0");
  if (config.steps < 0 || config.samples < 1) throw Error("fe config: steps >= 0, samples >= 1");
  if (config.batch < 0) throw Error("fe config: batch must be >= 0");
  for (int h : config.hidden)
    if (h < 1) throw Error("fe config: hidden widths must be >= 1");
}

FeTrainResult fe_train(const std::vector<TaskDataset>& datasets, const FeTrainConfig& config,
                       const TrainProgress& progress, int interval) {
  validate(config);
  if (datasets.empty()) throw Error("fe_train: need at least one dataset");
  for (const auto& d : datasets) validate_dataset(d);
  const int n = datasets.front().state_dim();
  const int m = datasets.front().control_dim();
  BasisSet basis;
  basis.problem = datasets.front().problem;
  basis.lambda_tik = config.lambda_tik;
  std::vector<int> widths{n + 1};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  basis.params = mlp_init(widths, config.activation, config.p, m, config.seed);
  basis.input_shift = Vector::Zero(n + 1);
  basis.input_scale = Vector::Ones(n + 1);
  if (config.normalize_inputs) {
    Eigen::Index total = 0;
    Vector sum = Vector::Zero(n + 1);
    Vector sq = Vector::Zero(n + 1);
    for (const auto& d : datasets) {
      const DenseMatrix in = dataset_inputs(d);
      sum += in.colwise().sum().transpose();
      sq += in.array().square().matrix().colwise().sum().transpose();
      total += in.rows();
    }
    const Vector mean = sum / static_cast<double>(total);
    Vector var = sq / static_cast<double>(total) - mean.cwiseAbs2();
    basis.input_shift = mean;
    for (int i = 0; i <= n; ++i) {
      const double sd = std::sqrt(std::max(var(i), 0.0));
      basis.input_scale(i) = sd > 1e-8 ? sd : 1.0;
    }
  }
  return fe_train(std::move(basis), datasets, config, progress, interval);
}

FeTrainResult fe_train(BasisSet basis, const std::vector<TaskDataset>& datasets,
                       const FeTrainConfig& config, const TrainProgress& progress, int interval) {
  validate(config);
  if (datasets.empty()) throw Error("fe_train: need at least one dataset");
  for (const auto& d : datasets) check_dataset(basis, d);
  const int m = basis.control_dim();
  std::mt19937_64 rng(mix_seed(config.seed, 0xfe));

  // Pre-normalized inputs and stacked labels per task.
  std::vector<DenseMatrix> inputs;
  std::vector<DenseMatrix> labels;
  for (const auto& d : datasets) {
    inputs.push_back(basis.normalize(dataset_inputs(d)));
    labels.push_back(d.controls);
  }

  Vector theta = basis.params.flatten();
  AdamState adam = adam_init(theta.size(), config.alpha);
  FeTrainResult result;
  result.loss_curve.reserve(static_cast<std::size_t>(config.steps));
  ad::Tape tape;
  std::vector<Eigen::Index> order;

  std::vector<std::size_t> task_order(datasets.size());
  std::iota(task_order.begin(), task_order.end(), std::size_t{0});
  const std::size_t n_tasks =
      config.batch > 0 ? std::min(datasets.size(), static_cast<std::size_t>(config.batch))
                            : datasets.size();

  for (int step = 0; step < config.steps; ++step) {
    // Sample this step's tasks, then rows within each task.
    std::vector<std::size_t> tasks;
    if (n_tasks == datasets.size()) {
      tasks = task_order;
    } else {
      for (std::size_t i = 0; i < n_tasks; ++i) {
        std::uniform_int_distribution<std::size_t> pickt(i, datasets.size() - 1);
        std::swap(task_order[i], task_order[pickt(rng)]);
      }
      tasks.assign(task_order.begin(), task_order.begin() + static_cast<std::ptrdiff_t>(n_tasks));
      std::sort(tasks.begin(), tasks.end());
    }
    std::vector<std::vector<Eigen::Index>> picks(n_tasks);
    Eigen::Index total = 0;
    for (std::size_t t = 0; t < n_tasks; ++t) {
      const std::size_t k = tasks[t];
      const Eigen::Index rows = inputs[k].rows();
      auto& pick = picks[t];
      if (rows <= config.samples) {
        pick.resize(static_cast<std::size_t>(rows));
        std::iota(pick.begin(), pick.end(), Eigen::Index{0});
      } else {
        order.resize(static_cast<std::size_t>(rows));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        for (int i = 0; i < config.samples; ++i) {
          std::uniform_int_distribution<Eigen::Index> pickd(i, rows - 1);
          std::swap(order[static_cast<std::size_t>(i)],
                    order[static_cast<std::size_t>(pickd(rng))]);
        }
        pick.assign(order.begin(), order.begin() + config.samples);
        std::sort(pick.begin(), pick.end());
      }
      total += static_cast<Eigen::Index>(pick.size());
    }
    DenseMatrix batch_in(total, basis.input_dim());
    std::vector<Vector> batch_u(n_tasks);
    Eigen::Index row = 0;
    for (std::size_t t = 0; t < n_tasks; ++t) {
      const std::size_t k = tasks[t];
      const auto& pick = picks[t];
      DenseMatrix u(static_cast<Eigen::Index>(pick.size()), m);
      for (std::size_t i = 0; i < pick.size(); ++i) {
        batch_in.row(row++) = inputs[k].row(pick[i]);
        u.row(static_cast<Eigen::Index>(i)) = labels[k].row(pick[i]);
      }
      batch_u[t] = stacked_controls(u);
    }

    tape.clear();
    const MlpVariables vars = record_variables(tape, basis.params);
    const ad::Expr out = mlp_forward(vars, basis.params.activation, tape.constant(batch_in));
    ad::Expr loss;
    bool have_loss = false;
    row = 0;
    try {
      for (std::size_t t = 0; t < n_tasks; ++t) {
        const auto count = static_cast<Eigen::Index>(picks[t].size());
        const double inv = 1.0 / static_cast<double>(count);
        const ad::Expr f = ad::heads_to_design(ad::slice_rows(out, row, count), m);
        row += count;
        const ad::Expr u = tape.constant(batch_u[t]);
        const ad::Expr ft = ad::transpose(f);
        const ad::Expr gram = inv * ad::matmul(ft, f);
        const ad::Expr rhs = inv * ad::matmul(ft, u);
        ad::Expr c;
        if (config.detach_coefficients) {
          DenseMatrix a = gram.value();
          a.diagonal().array() += basis.lambda_tik;
          c = tape.constant(mat_solve_spd(a, rhs.value()));
        } else {
          c = ad::solve_spd(ad::add_identity(gram, basis.lambda_tik), rhs);
        }
        ad::Expr task_loss = inv * ad::sum_squares(u - ad::matmul(f, c));
        if (config.lambda_basis > 0.0) {
          task_loss = task_loss + (config.lambda_basis * inv) * ad::sum_squares(f);
        }
        loss = have_loss ? loss + task_loss : task_loss;
        have_loss = true;
      }
    } catch (const NotPositiveDefinite& e) {
      throw DivergedTraining(std::string("fe_train: ") + e.what() + " at step " +
                             std::to_string(step));
    }
    loss = (1.0 / static_cast<double>(n_tasks)) * loss;
    const double value = loss.scalar();
    if (!std::isfinite(value)) {
      throw DivergedTraining("fe_train: loss became non-finite at step " + std::to_string(step));
    }
    result.loss_curve.push_back(value);
    const Vector grad = flatten_gradients(tape.grad(loss));
    adam_step(theta, grad, adam);
    basis.params.assign(theta);
    if (progress && interval > 0 && (step % interval == 0 || step + 1 == config.steps)) {
      progress(step, value);
    }
  }
  result.basis = std::move(basis);
  return result;
}

double fe_reconstruction_loss(const BasisSet& basis, const std::vector<TaskDataset>& datasets) {
  if (datasets.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& d : datasets) {
    const CoefficientVector c = infer_coefficients_ls(basis, d, basis.lambda_tik);
    acc += regularized_ls_loss(basis, d, c.c, 0.0);
  }
  return acc / static_cast<double>(datasets.size());
}

}  // namespace feoc
