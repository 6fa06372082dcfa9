#pragma once

#include <Eigen/Dense>

namespace feoc {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Solves A X = B for symmetric positive definite A by Cholesky.
/// Only the symmetric part of A is used. Throws NotPositiveDefinite when a
/// pivot is not strictly positive and ShapeMismatch on incompatible shapes.
DenseMatrix mat_solve_spd(const DenseMatrix& A, const DenseMatrix& B);

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace feoc
