#include "feoc/dense.hpp"
#include "feoc/errors.hpp"

namespace feoc {

DenseMatrix mat_solve_spd(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.rows() != A.cols() || A.rows() != B.rows()) {
    throw ShapeMismatch("mat_solve_spd: A is " + std::to_string(A.rows()) + "x" +
                        std::to_string(A.cols()) + ", B has " + std::to_string(B.rows()) +
                        " rows");
  }
  if (!A.allFinite() || !B.allFinite()) {
    throw NotPositiveDefinite("mat_solve_spd: non-finite input");
  }
  const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("mat_solve_spd: Cholesky pivot <= 0");
  }
  DenseMatrix X = llt.solve(Eigen::MatrixXd(B));
  if (!X.allFinite()) {
    throw NotPositiveDefinite("mat_solve_spd: solution is not finite");
  }
  return X;
}

}  // namespace feoc
