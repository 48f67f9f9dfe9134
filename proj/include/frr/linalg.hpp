#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "frr/error.hpp"
#include "frr/matrix.hpp"

namespace frr {

/// Compact SVD, keeping only the numerically nonzero singular triplets.
/// Each column of U has its largest-magnitude entry nonnegative.
struct SvdFactors {
  Matrix U;      // d x r
  Vector sigma;  // r, positive, non-increasing
  Matrix V;      // n x r
  Eigen::Index rank = 0;

  Matrix reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }
};

namespace detail {

// Flip (U_j, V_j) pairs so the largest |entry| of U_j is nonnegative.
inline void canonicalize_signs(Matrix& U, Matrix& V) {
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    Eigen::Index arg = 0;
    U.col(j).cwiseAbs().maxCoeff(&arg);
    if (U(arg, j) < 0.0) {
      U.col(j) *= -1.0;
      V.col(j) *= -1.0;
    }
  }
}

struct ThinSvd {
  Matrix U;
  Vector sigma;
  Matrix V;
};

// Full thin SVD with min(d, n) triplets, sign-canonicalized.
inline ThinSvd thin_svd(const Eigen::Ref<const Matrix>& A) {
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  canonicalize_signs(out.U, out.V);
  return out;
}

}  // namespace detail

inline double default_rank_tolerance(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

/// Compact SVD of A. `rank_tol` is relative to sigma_1; 0 selects
/// max(d, n) * eps.
inline SvdFactors compact_svd(const Eigen::Ref<const Matrix>& A, double rank_tol = 0.0) {
  require_nonempty(A, "compact_svd input");
  require_finite(A, "compact_svd input");
  if (rank_tol < 0.0) throw Error(ErrorCode::InvalidConfig, "rank_tol must be nonnegative");
  if (rank_tol == 0.0) rank_tol = default_rank_tolerance(A.rows(), A.cols());

  auto svd = detail::thin_svd(A);
  const double s1 = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
  Eigen::Index r = 0;
  while (r < svd.sigma.size() && svd.sigma(r) > 0.0 && svd.sigma(r) > rank_tol * s1) ++r;

  SvdFactors f;
  f.rank = r;
  f.U = svd.U.leftCols(r);
  f.sigma = svd.sigma.head(r);
  f.V = svd.V.leftCols(r);
  return f;
}

inline Eigen::Index numerical_rank(const Eigen::Ref<const Matrix>& A, double rank_tol = 0.0) {
  return compact_svd(A, rank_tol).rank;
}

/// Orthonormal basis of range(A) via column-pivoted Householder QR. The
/// column count equals the numerical rank; a zero matrix yields d x 0.
inline Matrix thin_qr(const Eigen::Ref<const Matrix>& A) {
  require_finite(A, "thin_qr input");
  if (A.size() == 0) return Matrix(A.rows(), 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  const Eigen::Index r = qr.rank();
  Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), r);
  return Q;
}

/// Moore-Penrose pseudoinverse built from the compact SVD.
inline Matrix pinv(const Eigen::Ref<const Matrix>& A) {
  require_nonempty(A, "pinv input");
  const SvdFactors f = compact_svd(A);
  return f.V * f.sigma.cwiseInverse().asDiagonal() * f.U.transpose();
}

enum class NormKind { Frobenius, Nuclear, Spectral, L1, Linf, L21 };

inline NormKind parse_norm_kind(std::string_view name) {
  if (name == "frobenius" || name == "fro") return NormKind::Frobenius;
  if (name == "nuclear") return NormKind::Nuclear;
  if (name == "spectral") return NormKind::Spectral;
  if (name == "l1") return NormKind::L1;
  if (name == "linf") return NormKind::Linf;
  if (name == "l21") return NormKind::L21;
  throw Error(ErrorCode::UnknownKind, "unknown norm '" + std::string(name) + "'");
}

/// l1 and linf are entrywise (sum of |a_ij| and max |a_ij|); l21 is the sum
/// of column l2 norms.
inline double matrix_norm(const Eigen::Ref<const Matrix>& A, NormKind kind) {
  require_nonempty(A, "matrix_norm input");
  require_finite(A, "matrix_norm input");
  switch (kind) {
    case NormKind::Frobenius: return A.norm();
    case NormKind::Nuclear: return detail::thin_svd(A).sigma.sum();
    case NormKind::Spectral: return detail::thin_svd(A).sigma(0);
    case NormKind::L1: return A.cwiseAbs().sum();
    case NormKind::Linf: return A.cwiseAbs().maxCoeff();
    case NormKind::L21: return A.colwise().norm().sum();
  }
  throw Error(ErrorCode::UnknownKind, "unknown norm kind");
}

inline double matrix_norm(const Eigen::Ref<const Matrix>& A, std::string_view kind) {
  return matrix_norm(A, parse_norm_kind(kind));
}

struct LowRankFactors {
  Matrix L;  // rows x m
  Matrix R;  // m x cols
};

/// Best rank-m Frobenius approximation Z ~ L R (Eckart-Young), with
/// L = U_m diag(sigma_m) and R = V_m^T.
inline LowRankFactors best_rank_m_factors(const Eigen::Ref<const Matrix>& Z, Eigen::Index m) {
  require_nonempty(Z, "best_rank_m_factors input");
  require_finite(Z, "best_rank_m_factors input");
  if (m < 1 || m > std::min(Z.rows(), Z.cols()))
    throw Error(ErrorCode::RankTooLarge, "m must lie in [1, min(rows, cols)]");
  auto svd = detail::thin_svd(Z);
  LowRankFactors f;
  f.L = svd.U.leftCols(m) * svd.sigma.head(m).asDiagonal();
  f.R = svd.V.leftCols(m).transpose();
  return f;
}

/// Singular values of A in non-increasing order, all min(d, n) of them.
inline Vector singular_values(const Eigen::Ref<const Matrix>& A) {
  require_finite(A, "singular_values input");
  return Eigen::BDCSVD<Matrix>(A).singularValues();
}

}  // namespace frr
