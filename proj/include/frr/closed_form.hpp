#pragma once

#include <string>

#include "frr/linalg.hpp"

namespace frr {

/// Noiseless optimum (Z, L, R) of the fixed-rank model together with its
/// objective ||Z - L R||_F^2 and the numerical rank of X.
struct ClosedFormSolution {
  Matrix Z;
  Matrix L;
  Matrix R;
  double objective = 0.0;
  Eigen::Index rank_X = 0;
};

namespace detail {

inline SvdFactors nonzero_svd(const Eigen::Ref<const Matrix>& X) {
  SvdFactors f = compact_svd(X);
  if (f.rank == 0) throw Error(ErrorCode::ZeroMatrix, "X has numerical rank 0");
  return f;
}

inline void check_target_rank(Eigen::Index m, Eigen::Index rank_X) {
  if (m < 1 || m > rank_X)
    throw Error(ErrorCode::RankTooLarge,
                "m = " + std::to_string(m) + " outside [1, rank(X) = " + std::to_string(rank_X) + "]");
}

// Z = B B^T with L = B_{1:m}, R = L^T.
inline ClosedFormSolution projector_solution(const Matrix& basis, Eigen::Index m) {
  ClosedFormSolution s;
  s.rank_X = basis.cols();
  s.Z = basis * basis.transpose();
  s.L = basis.leftCols(m);
  s.R = s.L.transpose();
  s.objective = (s.Z - s.L * s.R).squaredNorm();
  return s;
}

}  // namespace detail

/// Shape interaction matrix V_X V_X^T: the minimum nuclear-norm Z with X = X Z,
/// i.e. the orthogonal projector onto the row space of X.
inline Matrix sim_solution(const Eigen::Ref<const Matrix>& X) {
  const SvdFactors f = detail::nonzero_svd(X);
  return f.V * f.V.transpose();
}

/// Global optimum of min ||Z - LR||_F^2 s.t. X = XZ; objective is rank(X) - m.
inline ClosedFormSolution frr_closed_form(const Eigen::Ref<const Matrix>& X, Eigen::Index m) {
  const SvdFactors f = detail::nonzero_svd(X);
  detail::check_target_rank(m, f.rank);
  return detail::projector_solution(f.V, m);
}

/// Transposed model: X = ZX with Z d x d; optimum built from U_X.
inline ClosedFormSolution tfrr_closed_form(const Eigen::Ref<const Matrix>& X, Eigen::Index m) {
  const SvdFactors f = detail::nonzero_svd(X);
  detail::check_target_rank(m, f.rank);
  return detail::projector_solution(f.U, m);
}

/// Leading m left singular vectors: the uncentered PCA basis.
inline Matrix pca_basis(const Eigen::Ref<const Matrix>& X, Eigen::Index m) {
  const SvdFactors f = detail::nonzero_svd(X);
  detail::check_target_rank(m, f.rank);
  return f.U.leftCols(m);
}

}  // namespace frr
