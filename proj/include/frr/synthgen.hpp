#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "frr/error.hpp"
#include "frr/matrix.hpp"

namespace frr {

/// k subspaces of dimension d_l in R^{d_h}, p samples each.
struct SyntheticSpec {
  int k = 1;
  int p = 1;
  int d_h = 1;
  int d_l = 1;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Matrix X;                   // d_h x (k p), grouped by subspace
  Labels truth;               // subspace index per column
  std::vector<Matrix> bases;  // k orthonormal d_h x d_l bases
  std::vector<std::string> warnings;
};

namespace detail {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  return G;
}

// Q factor of a Gaussian with the R diagonal forced positive.
inline Matrix haar_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rows, cols, rng));
  Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j)
    if (packed(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

}  // namespace detail

/// Random rotation in SO(d): Haar orthogonal matrix with determinant +1.
inline Matrix random_rotation(Eigen::Index d, std::mt19937_64& rng) {
  Matrix T = detail::haar_orthonormal(d, d, rng);
  if (T.determinant() < 0.0) T.col(0) *= -1.0;
  return T;
}

/// U_1 random orthonormal, U_{i+1} = T U_i for one random rotation T,
/// X_i = U_i C_i with C_i uniform on [0, 1].
inline SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.k < 1 || spec.p < 1 || spec.d_h < 1 || spec.d_l < 1)
    throw Error(ErrorCode::InvalidSpec, "k, p, d_h, d_l must all be positive");
  if (spec.d_l > spec.d_h) throw Error(ErrorCode::InvalidSpec, "d_l cannot exceed d_h");

  SyntheticData data;
  if (static_cast<long>(spec.k) * spec.d_l > spec.d_h)
    data.warnings.push_back("k*d_l > d_h: subspaces cannot be independent");

  std::mt19937_64 rng(spec.seed);
  Matrix U = detail::haar_orthonormal(spec.d_h, spec.d_l, rng);
  const Matrix T = random_rotation(spec.d_h, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  data.X.resize(spec.d_h, static_cast<Eigen::Index>(spec.k) * spec.p);
  data.truth.reserve(static_cast<std::size_t>(spec.k) * spec.p);
  for (int i = 0; i < spec.k; ++i) {
    if (i > 0) U = T * U;
    Matrix C(spec.d_l, spec.p);
    for (Eigen::Index c = 0; c < C.cols(); ++c)
      for (Eigen::Index r = 0; r < C.rows(); ++r) C(r, c) = unif(rng);
    data.X.middleCols(static_cast<Eigen::Index>(i) * spec.p, spec.p) = U * C;
    data.bases.push_back(U);
    data.truth.insert(data.truth.end(), static_cast<std::size_t>(spec.p), i);
  }
  return data;
}

struct CorruptedData {
  Matrix X;
  Mask mask;  // true for appended outlier columns
};

/// Appends `count` columns with i.i.d. uniform [0, magnitude] entries.
inline CorruptedData inject_outliers(const Eigen::Ref<const Matrix>& X, int count, double magnitude,
                                     std::uint64_t seed) {
  if (count < 0 || count > X.cols()) throw Error(ErrorCode::InvalidCount, "count must lie in [0, n]");
  if (!(magnitude >= 0.0)) throw Error(ErrorCode::InvalidSpec, "magnitude must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, magnitude);
  CorruptedData out;
  out.X.resize(X.rows(), X.cols() + count);
  out.X.leftCols(X.cols()) = X;
  for (Eigen::Index c = X.cols(); c < out.X.cols(); ++c)
    for (Eigen::Index r = 0; r < X.rows(); ++r) out.X(r, c) = magnitude > 0.0 ? unif(rng) : 0.0;
  out.mask.assign(static_cast<std::size_t>(X.cols()), false);
  out.mask.insert(out.mask.end(), static_cast<std::size_t>(count), true);
  return out;
}

/// Random column permutation; returns perm with new column j = old column perm[j].
inline std::vector<int> shuffle_permutation(Eigen::Index n, std::uint64_t seed) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

inline Matrix permute_columns(const Eigen::Ref<const Matrix>& X, const std::vector<int>& perm) {
  Matrix out(X.rows(), X.cols());
  for (std::size_t j = 0; j < perm.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(perm[j]);
  return out;
}

}  // namespace frr
