#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feoc/dense.hpp"
#include "feoc/tape.hpp"

namespace feoc {

enum class Activation { Tanh, Relu, Gelu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Dense layer computing `input * weight + bias` on row-vector inputs.
struct Layer {
  DenseMatrix weight;  // fan_in x fan_out
  Vector bias;         // fan_out
};

/// Multi-head perceptron: a shared trunk whose final linear layer emits
/// head_count heads of head_dim outputs each, laid out head-major.
struct MlpParams {
  std::vector<Layer> layers;
  Activation activation = Activation::Tanh;
  int head_count = 1;
  int head_dim = 1;

  int input_dim() const { return static_cast<int>(layers.front().weight.rows()); }
  int output_dim() const { return static_cast<int>(layers.back().weight.cols()); }
  /// Layer widths from input to output, e.g. {3, 128, 128, 128}.
  std::vector<int> widths() const;
  std::size_t parameter_count() const;

  /// Parameters in layer order; each layer contributes its weight (row-major)
  /// followed by its bias.
  Vector flatten() const;
  void assign(const Vector& flat);
};

/// Glorot-uniform weights, zero biases. `widths` runs input → ... → last
/// hidden; the head layer of size head_count * head_dim is appended.
MlpParams mlp_init(std::span<const int> widths, Activation activation, int head_count,
                   int head_dim, std::uint64_t seed);

/// Evaluates one input and returns the head_count x head_dim output.
DenseMatrix mlp_forward(const MlpParams& params, const Vector& input);

/// Evaluates a batch of row inputs; returns N x (head_count * head_dim).
DenseMatrix mlp_forward_batch(const MlpParams& params, const DenseMatrix& inputs);

/// Trainable leaves for every layer, recorded in flatten() order.
struct MlpVariables {
  std::vector<ad::Expr> weights;
  std::vector<ad::Expr> biases;
};

MlpVariables record_variables(ad::Tape& tape, const MlpParams& params);

ad::Expr mlp_forward(const MlpVariables& vars, Activation activation, ad::Expr inputs);

ad::Expr activate(ad::Expr x, Activation activation);

/// Concatenates tape gradients (as returned by Tape::grad for the variables
/// of record_variables) into a flatten()-ordered vector.
Vector flatten_gradients(const std::vector<DenseMatrix>& grads);

}  // namespace feoc
