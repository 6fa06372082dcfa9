#include "feoc/tape.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "feoc/errors.hpp"

namespace feoc::ad {

namespace {

Tape* common_tape(Expr a, Expr b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw ShapeMismatch("ad: operands recorded on different tapes");
  }
  return a.tape();
}

void require_same_shape(const char* op, Expr a, Expr b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string("ad::") + op + ": shape " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

const DenseMatrix& Expr::value() const { return tape_->value(index_); }

double Expr::scalar() const {
  const auto& v = value();
  if (v.size() != 1) throw ShapeMismatch("ad: scalar() on a non-1x1 node");
  return v(0, 0);
}

Expr Tape::constant(DenseMatrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Expr Tape::variable(DenseMatrix value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  variables_.push_back(nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Expr Tape::record(Op op, DenseMatrix value, std::size_t a, std::size_t b, double scalar,
                  std::size_t aux) {
  Node node;
  node.op = op;
  node.parents[0] = a;
  node.parents[1] = b;
  node.value = std::move(value);
  node.scalar = scalar;
  node.aux = aux;
  node.requires_grad = nodes_[a].requires_grad || (b != kNone && nodes_[b].requires_grad);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Expr Tape::record_solve(DenseMatrix value, std::size_t a, std::size_t b,
                        std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> factor) {
  Expr e = record(Op::SolveSpd, std::move(value), a, b);
  nodes_[e.index()].factor = std::move(factor);
  return e;
}

void Tape::clear() {
  nodes_.clear();
  variables_.clear();
}

void Tape::accumulate(std::size_t index, const DenseMatrix& g) {
  accumulate_with(index, [&](DenseMatrix& adj) { adj += g; });
}

template <typename Fn>
void Tape::accumulate_with(std::size_t index, Fn&& fn) {
  Node& node = nodes_[index];
  if (!node.requires_grad) return;
  if (!node.has_adjoint) {
    node.adjoint = DenseMatrix::Zero(node.value.rows(), node.value.cols());
    node.has_adjoint = true;
  }
  fn(node.adjoint);
}

std::vector<DenseMatrix> Tape::grad(Expr loss) {
  if (loss.tape() != this) throw ShapeMismatch("ad::grad: loss recorded on another tape");
  if (nodes_[loss.index()].value.size() != 1) {
    throw ShapeMismatch("ad::grad: loss must be 1x1");
  }
  for (auto& node : nodes_) {
    node.has_adjoint = false;
    node.adjoint.resize(0, 0);
  }
  Node& root = nodes_[loss.index()];
  root.adjoint = DenseMatrix::Ones(1, 1);
  root.has_adjoint = true;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    if (nodes_[i].has_adjoint && nodes_[i].op != Op::Leaf) backward_node(i);
  }
  std::vector<DenseMatrix> out;
  out.reserve(variables_.size());
  for (std::size_t v : variables_) {
    const Node& node = nodes_[v];
    out.push_back(node.has_adjoint ? node.adjoint
                                   : DenseMatrix::Zero(node.value.rows(), node.value.cols()));
  }
  return out;
}

DenseMatrix Tape::adjoint(Expr e) const {
  const Node& node = nodes_[e.index()];
  if (node.has_adjoint) return node.adjoint;
  return DenseMatrix::Zero(node.value.rows(), node.value.cols());
}

void Tape::backward_node(std::size_t i) {
  // Parents precede i and the node list is not resized during the sweep, so
  // these references stay valid while parent adjoints are updated.
  const Node& node = nodes_[i];
  const DenseMatrix& g = node.adjoint;
  const std::size_t a = node.parents[0];
  const std::size_t b = node.parents[1];
  switch (node.op) {
    case Op::Leaf:
      break;
    case Op::MatMul:
      accumulate_with(a, [&](DenseMatrix& adj) {
        adj.noalias() += g * nodes_[b].value.transpose();
      });
      accumulate_with(b, [&](DenseMatrix& adj) {
        adj.noalias() += nodes_[a].value.transpose() * g;
      });
      break;
    case Op::Add:
      accumulate(a, g);
      accumulate(b, g);
      break;
    case Op::Sub:
      accumulate(a, g);
      accumulate_with(b, [&](DenseMatrix& adj) { adj -= g; });
      break;
    case Op::Hadamard:
      accumulate_with(a, [&](DenseMatrix& adj) {
        adj.array() += g.array() * nodes_[b].value.array();
      });
      accumulate_with(b, [&](DenseMatrix& adj) {
        adj.array() += g.array() * nodes_[a].value.array();
      });
      break;
    case Op::Scale:
      accumulate_with(a, [&](DenseMatrix& adj) { adj += node.scalar * g; });
      break;
    case Op::AddRowBias:
      accumulate(a, g);
      accumulate_with(b, [&](DenseMatrix& adj) { adj += g.colwise().sum(); });
      break;
    case Op::Tanh:
      accumulate_with(a, [&](DenseMatrix& adj) {
        adj.array() += g.array() * (1.0 - node.value.array().square());
      });
      break;
    case Op::Relu:
      accumulate_with(a, [&](DenseMatrix& adj) {
        adj.array() += (nodes_[a].value.array() > 0.0).select(g.array(), 0.0);
      });
      break;
    case Op::Gelu:
      accumulate_with(a, [&](DenseMatrix& adj) {
        adj.array() += g.array() * nodes_[a].value.array().unaryExpr(
                                       [](double x) { return normal_cdf(x) + x * normal_pdf(x); });
      });
      break;
    case Op::Transpose:
      accumulate_with(a, [&](DenseMatrix& adj) { adj += g.transpose(); });
      break;
    case Op::AddIdentity:
      accumulate(a, g);
      break;
    case Op::SolveSpd: {
      const DenseMatrix s = node.factor->solve(Eigen::MatrixXd(g));
      accumulate(b, s);
      accumulate_with(a, [&](DenseMatrix& adj) {
        const DenseMatrix sx = s * node.value.transpose();
        adj -= 0.5 * (sx + sx.transpose());
      });
      break;
    }
    case Op::HeadsToDesign: {
      const Eigen::Index m = static_cast<Eigen::Index>(node.aux);
      accumulate_with(a, [&](DenseMatrix& adj) {
        const Eigen::Index samples = adj.rows();
        const Eigen::Index p = adj.cols() / m;
        for (Eigen::Index i = 0; i < samples; ++i)
          for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index d = 0; d < m; ++d) adj(i, j * m + d) += g(i * m + d, j);
      });
      break;
    }
    case Op::SliceRows: {
      const auto begin = static_cast<Eigen::Index>(node.aux);
      accumulate_with(a, [&](DenseMatrix& adj) { adj.middleRows(begin, g.rows()) += g; });
      break;
    }
    case Op::SumSquares:
      accumulate_with(a, [&](DenseMatrix& adj) { adj += (2.0 * g(0, 0)) * nodes_[a].value; });
      break;
    case Op::Sum:
      accumulate_with(a, [&](DenseMatrix& adj) { adj.array() += g(0, 0); });
      break;
  }
}

Expr matmul(Expr a, Expr b) {
  Tape* t = common_tape(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("ad::matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()));
  }
  DenseMatrix v(a.rows(), b.cols());
  v.noalias() = a.value() * b.value();
  return t->record(Op::MatMul, std::move(v), a.index(), b.index());
}

Expr operator+(Expr a, Expr b) {
  Tape* t = common_tape(a, b);
  require_same_shape("add", a, b);
  return t->record(Op::Add, a.value() + b.value(), a.index(), b.index());
}

Expr operator-(Expr a, Expr b) {
  Tape* t = common_tape(a, b);
  require_same_shape("sub", a, b);
  return t->record(Op::Sub, a.value() - b.value(), a.index(), b.index());
}

Expr operator*(double s, Expr a) {
  return a.tape()->record(Op::Scale, s * a.value(), a.index(), Tape::kNone, s);
}

Expr hadamard(Expr a, Expr b) {
  Tape* t = common_tape(a, b);
  require_same_shape("hadamard", a, b);
  return t->record(Op::Hadamard, a.value().cwiseProduct(b.value()), a.index(), b.index());
}

Expr add_row_bias(Expr a, Expr b) {
  Tape* t = common_tape(a, b);
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw ShapeMismatch("ad::add_row_bias: bias must be 1x" + std::to_string(a.cols()));
  }
  DenseMatrix v = a.value();
  v.rowwise() += b.value().row(0);
  return t->record(Op::AddRowBias, std::move(v), a.index(), b.index());
}

Expr tanh(Expr a) {
  return a.tape()->record(Op::Tanh, a.value().array().tanh().matrix(), a.index());
}

Expr relu(Expr a) {
  return a.tape()->record(Op::Relu, a.value().cwiseMax(0.0), a.index());
}

Expr gelu(Expr a) {
  DenseMatrix v = a.value().unaryExpr([](double x) { return x * normal_cdf(x); });
  return a.tape()->record(Op::Gelu, std::move(v), a.index());
}

Expr transpose(Expr a) {
  return a.tape()->record(Op::Transpose, a.value().transpose(), a.index());
}

Expr add_identity(Expr a, double lambda) {
  if (a.rows() != a.cols()) throw ShapeMismatch("ad::add_identity: matrix not square");
  DenseMatrix v = a.value();
  v.diagonal().array() += lambda;
  return a.tape()->record(Op::AddIdentity, std::move(v), a.index(), Tape::kNone, lambda);
}

Expr solve_spd(Expr a, Expr b) {
  Tape* t = common_tape(a, b);
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw ShapeMismatch("ad::solve_spd: incompatible shapes");
  }
  const Eigen::MatrixXd sym = 0.5 * (a.value() + a.value().transpose());
  auto factor = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(sym);
  if (factor->info() != Eigen::Success) {
    throw NotPositiveDefinite("ad::solve_spd: Cholesky pivot <= 0");
  }
  DenseMatrix x = factor->solve(Eigen::MatrixXd(b.value()));
  if (!x.allFinite()) throw NotPositiveDefinite("ad::solve_spd: solution is not finite");
  return t->record_solve(std::move(x), a.index(), b.index(), std::move(factor));
}

Expr heads_to_design(Expr y, Eigen::Index head_dim) {
  const DenseMatrix& v = y.value();
  if (head_dim <= 0 || v.cols() % head_dim != 0) {
    throw ShapeMismatch("ad::heads_to_design: columns not divisible by head_dim");
  }
  const Eigen::Index samples = v.rows();
  const Eigen::Index p = v.cols() / head_dim;
  DenseMatrix out(samples * head_dim, p);
  for (Eigen::Index i = 0; i < samples; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index d = 0; d < head_dim; ++d) out(i * head_dim + d, j) = v(i, j * head_dim + d);
  return y.tape()->record(Op::HeadsToDesign, std::move(out), y.index(), Tape::kNone, 0.0,
                          static_cast<std::size_t>(head_dim));
}

Expr slice_rows(Expr a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    throw ShapeMismatch("ad::slice_rows: range out of bounds");
  }
  return a.tape()->record(Op::SliceRows, a.value().middleRows(begin, count), a.index(),
                          Tape::kNone, 0.0, static_cast<std::size_t>(begin));
}

Expr sum_squares(Expr a) {
  DenseMatrix v(1, 1);
  v(0, 0) = a.value().squaredNorm();
  return a.tape()->record(Op::SumSquares, std::move(v), a.index());
}

Expr sum(Expr a) {
  DenseMatrix v(1, 1);
  v(0, 0) = a.value().sum();
  return a.tape()->record(Op::Sum, std::move(v), a.index());
}

}  // namespace feoc::ad
