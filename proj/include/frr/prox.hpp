#pragma once

#include "frr/error.hpp"
#include "frr/matrix.hpp"

namespace frr {

/// Column-wise group shrinkage: argmin_E tau * ||E||_{2,1} + 1/2 ||C - E||_F^2.
/// Columns with norm <= tau are zeroed, others scaled by (1 - tau / ||c||).
inline Matrix prox_l21(const Eigen::Ref<const Matrix>& C, double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorCode::NegativeTau, "tau must be nonnegative");
  Matrix E(C.rows(), C.cols());
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    const double nrm = C.col(j).norm();
    if (nrm > tau)
      E.col(j) = (1.0 - tau / nrm) * C.col(j);
    else
      E.col(j).setZero();
  }
  return E;
}

/// Same shrinkage applied to rows instead of columns.
inline Matrix prox_l21_rows(const Eigen::Ref<const Matrix>& C, double tau) {
  return prox_l21(C.transpose(), tau).transpose();
}

}  // namespace frr
