#pragma once

// Matrix-valued reverse-mode automatic differentiation.
//
// A Tape records primitive operations in creation order; parents always
// precede children, so the backward sweep is a single reverse pass over the
// node list. Each node owns its value and (after backward) its adjoint.

#include <cstddef>
#include <memory>
#include <vector>

#include "feoc/dense.hpp"

namespace feoc::ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Expr {
 public:
  Expr() = default;
  Expr(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape() const noexcept { return tape_; }
  std::size_t index() const noexcept { return index_; }
  const DenseMatrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

enum class Op {
  Leaf,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Scale,
  AddRowBias,
  Tanh,
  Relu,
  Gelu,
  Transpose,
  AddIdentity,
  SolveSpd,
  HeadsToDesign,
  SliceRows,
  SumSquares,
  Sum,
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Expr constant(DenseMatrix value);
  /// Trainable leaf; its gradient is reported by grad() in creation order.
  Expr variable(DenseMatrix value);

  /// Runs the reverse sweep from a 1x1 loss node and returns the gradient of
  /// every variable() leaf, in the order the variables were created.
  std::vector<DenseMatrix> grad(Expr loss);

  /// Adjoint of any node after grad(); zero matrix if none reached it.
  DenseMatrix adjoint(Expr e) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear();

  const DenseMatrix& value(std::size_t index) const { return nodes_[index].value; }

  // Recording interface used by the free functions below.
  Expr record(Op op, DenseMatrix value, std::size_t a, std::size_t b = kNone,
              double scalar = 0.0, std::size_t aux = 0);
  Expr record_solve(DenseMatrix value, std::size_t a, std::size_t b,
                    std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> factor);

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

 private:
  struct Node {
    Op op = Op::Leaf;
    std::size_t parents[2] = {kNone, kNone};
    DenseMatrix value;
    DenseMatrix adjoint;
    double scalar = 0.0;
    std::size_t aux = 0;
    bool requires_grad = false;
    bool has_adjoint = false;
    std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> factor;
  };

  void accumulate(std::size_t index, const DenseMatrix& g);
  template <typename Fn>
  void accumulate_with(std::size_t index, Fn&& fn);
  void backward_node(std::size_t index);

  std::vector<Node> nodes_;
  std::vector<std::size_t> variables_;
};

Expr matmul(Expr a, Expr b);
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(double s, Expr a);
Expr hadamard(Expr a, Expr b);
/// a (N x k) plus the row vector b (1 x k) broadcast over rows.
Expr add_row_bias(Expr a, Expr b);
Expr tanh(Expr a);
Expr relu(Expr a);
/// Exact (erf-based) GELU.
Expr gelu(Expr a);
Expr transpose(Expr a);
/// a + lambda * I for square a.
Expr add_identity(Expr a, double lambda);
/// X = sym(A)^{-1} B through a Cholesky factorization. Throws
/// NotPositiveDefinite like mat_solve_spd.
Expr solve_spd(Expr a, Expr b);
/// Reorders a multi-head output (M x p*m, head-major within a row) into the
/// (M*m) x p design matrix whose column j stacks basis j over samples.
Expr heads_to_design(Expr y, Eigen::Index head_dim);
Expr slice_rows(Expr a, Eigen::Index begin, Eigen::Index count);
/// Sum of squared entries as a 1x1 node.
Expr sum_squares(Expr a);
Expr sum(Expr a);

}  // namespace feoc::ad
