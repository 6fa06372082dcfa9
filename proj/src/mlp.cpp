#include "feoc/mlp.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "feoc/errors.hpp"

namespace feoc {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Gelu: return "gelu";
  }
  return "tanh";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "gelu") return Activation::Gelu;
  throw Error("unknown activation '" + name + "'");
}

std::vector<int> MlpParams::widths() const {
  std::vector<int> w;
  w.push_back(input_dim());
  for (const auto& l : layers) w.push_back(static_cast<int>(l.weight.cols()));
  return w;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vector MlpParams::flatten() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index off = 0;
  for (const auto& l : layers) {
    flat.segment(off, l.weight.size()) =
        Eigen::Map<const Vector>(l.weight.data(), l.weight.size());
    off += l.weight.size();
    flat.segment(off, l.bias.size()) = l.bias;
    off += l.bias.size();
  }
  return flat;
}

void MlpParams::assign(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw ShapeMismatch("MlpParams::assign: expected " + std::to_string(parameter_count()) +
                        " parameters, got " + std::to_string(flat.size()));
  }
  Eigen::Index off = 0;
  for (auto& l : layers) {
    Eigen::Map<Vector>(l.weight.data(), l.weight.size()) = flat.segment(off, l.weight.size());
    off += l.weight.size();
    l.bias = flat.segment(off, l.bias.size());
    off += l.bias.size();
  }
}

MlpParams mlp_init(std::span<const int> widths, Activation activation, int head_count,
                   int head_dim, std::uint64_t seed) {
  if (widths.empty() || head_count < 1 || head_dim < 1) {
    throw ShapeMismatch("mlp_init: need an input width and positive head shape");
  }
  std::vector<int> all(widths.begin(), widths.end());
  all.push_back(head_count * head_dim);
  std::mt19937_64 rng(seed);
  MlpParams p;
  p.activation = activation;
  p.head_count = head_count;
  p.head_dim = head_dim;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const int fan_in = all[i];
    const int fan_out = all[i + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer;
    layer.weight.resize(fan_in, fan_out);
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = dist(rng);
    layer.bias = Vector::Zero(fan_out);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

namespace {

void apply_activation(DenseMatrix& h, Activation a) {
  switch (a) {
    case Activation::Tanh:
      h = h.array().tanh().matrix();
      break;
    case Activation::Relu:
      h = h.cwiseMax(0.0);
      break;
    case Activation::Gelu:
      h = h.unaryExpr([](double x) { return 0.5 * x * std::erfc(-x / std::numbers::sqrt2); });
      break;
  }
}

}  // namespace

DenseMatrix mlp_forward_batch(const MlpParams& params, const DenseMatrix& inputs) {
  if (inputs.cols() != params.input_dim()) {
    throw ShapeMismatch("mlp_forward: input has " + std::to_string(inputs.cols()) +
                        " columns, network expects " + std::to_string(params.input_dim()));
  }
  DenseMatrix h = inputs;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    DenseMatrix next(h.rows(), l.weight.cols());
    next.noalias() = h * l.weight;
    next.rowwise() += l.bias.transpose();
    if (i + 1 < params.layers.size()) apply_activation(next, params.activation);
    h = std::move(next);
  }
  return h;
}

DenseMatrix mlp_forward(const MlpParams& params, const Vector& input) {
  if (input.size() != params.input_dim()) {
    throw ShapeMismatch("mlp_forward: input length " + std::to_string(input.size()) +
                        ", network expects " + std::to_string(params.input_dim()));
  }
  const DenseMatrix row = input.transpose();
  const DenseMatrix out = mlp_forward_batch(params, row);
  return Eigen::Map<const DenseMatrix>(out.data(), params.head_count, params.head_dim);
}

MlpVariables record_variables(ad::Tape& tape, const MlpParams& params) {
  MlpVariables vars;
  for (const auto& l : params.layers) {
    vars.weights.push_back(tape.variable(l.weight));
    vars.biases.push_back(tape.variable(l.bias.transpose()));
  }
  return vars;
}

ad::Expr activate(ad::Expr x, Activation activation) {
  switch (activation) {
    case Activation::Tanh: return ad::tanh(x);
    case Activation::Relu: return ad::relu(x);
    case Activation::Gelu: return ad::gelu(x);
  }
  return ad::tanh(x);
}

ad::Expr mlp_forward(const MlpVariables& vars, Activation activation, ad::Expr inputs) {
  ad::Expr h = inputs;
  for (std::size_t i = 0; i < vars.weights.size(); ++i) {
    h = ad::add_row_bias(ad::matmul(h, vars.weights[i]), vars.biases[i]);
    if (i + 1 < vars.weights.size()) h = activate(h, activation);
  }
  return h;
}

Vector flatten_gradients(const std::vector<DenseMatrix>& grads) {
  Eigen::Index n = 0;
  for (const auto& g : grads) n += g.size();
  Vector flat(n);
  Eigen::Index off = 0;
  for (const auto& g : grads) {
    flat.segment(off, g.size()) = Eigen::Map<const Vector>(g.data(), g.size());
    off += g.size();
  }
  return flat;
}

}  // namespace feoc
