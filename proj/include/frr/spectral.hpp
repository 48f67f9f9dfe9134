#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "frr/error.hpp"
#include "frr/matrix.hpp"

namespace frr {

class Affinity;
inline Affinity build_affinity(const Eigen::Ref<const Matrix>& M);

/// Symmetric, entrywise nonnegative graph weights.
class Affinity {
 public:
  /// Validates an externally supplied weight matrix.
  static Affinity from_matrix(Matrix A) {
    if (A.rows() != A.cols()) throw Error(ErrorCode::NotSquare, "affinity must be square");
    require_finite(A, "affinity");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() != 0.0) throw Error(ErrorCode::InvalidConfig, "affinity not symmetric");
    if (A.size() > 0 && A.minCoeff() < 0.0) throw Error(ErrorCode::InvalidConfig, "affinity has negative weights");
    return Affinity(std::move(A));
  }

  const Matrix& matrix() const { return A_; }
  Eigen::Index size() const { return A_.rows(); }

 private:
  explicit Affinity(Matrix A) : A_(std::move(A)) {}
  friend Affinity build_affinity(const Eigen::Ref<const Matrix>& M);
  Matrix A_;
};

/// |M| + |M^T|.
inline Affinity build_affinity(const Eigen::Ref<const Matrix>& M) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::NotSquare, "representation matrix must be square");
  require_finite(M, "representation matrix");
  return Affinity(M.cwiseAbs() + M.transpose().cwiseAbs());
}

struct KMeansResult {
  Labels labels;
  double inertia = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double sq_dist(const Matrix& P, Eigen::Index i, const Matrix& C, Eigen::Index c) {
  return (P.row(i) - C.row(c)).squaredNorm();
}

// One k-means++ seeded Lloyd run over the rows of P.
inline KMeansResult kmeans_once(const Matrix& P, int k, std::mt19937_64& rng, int max_iter) {
  const Eigen::Index n = P.rows();
  Matrix C(k, P.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  C.row(0) = P.row(pick(rng));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j) best = std::min(best, sq_dist(P, i, C, j));
      d2[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[static_cast<std::size_t>(i)];
        chosen = i;
        if (target < 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    C.row(c) = P.row(chosen);
  }

  KMeansResult res;
  res.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best_c = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dist = sq_dist(P, i, C, c);
        if (dist < best) {
          best = dist;
          best_c = c;
        }
      }
      inertia += best;
      if (res.labels[static_cast<std::size_t>(i)] != best_c) {
        res.labels[static_cast<std::size_t>(i)] = best_c;
        changed = true;
      }
    }
    res.inertia = inertia;
    if (!changed) break;

    Matrix sums = Matrix::Zero(k, P.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = res.labels[static_cast<std::size_t>(i)];
      sums.row(c) += P.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        C.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      } else {
        // Empty cluster: move it to the point farthest from its centroid.
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dist = sq_dist(P, i, C, res.labels[static_cast<std::size_t>(i)]);
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        C.row(c) = P.row(far);
      }
    }
  }
  return res;
}

}  // namespace detail

/// Best-inertia k-means over `restarts` k-means++ runs; ties keep the earliest run.
inline KMeansResult kmeans(const Eigen::Ref<const Matrix>& points, int k, std::uint64_t seed, int restarts = 20,
                           int max_iter = 300) {
  if (k < 1 || k > points.rows()) throw Error(ErrorCode::KTooLarge, "k must lie in [1, n]");
  const Matrix P = points;
  KMeansResult best;
  for (int r = 0; r < restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    KMeansResult run = detail::kmeans_once(P, k, rng, max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

/// Row-normalized spectral embedding from the k smallest eigenvectors of
/// I - D^{-1/2} A D^{-1/2}. Zero-degree vertices embed at the origin.
inline Matrix spectral_embedding(const Affinity& affinity, int k) {
  const Matrix& A = affinity.matrix();
  const Eigen::Index n = A.rows();
  const Vector deg = A.rowwise().sum();
  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  Matrix Lsym = -(inv_sqrt.asDiagonal() * A * inv_sqrt.asDiagonal());
  Lsym.diagonal().array() += 1.0;
  Lsym = 0.5 * (Lsym + Lsym.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(Lsym);
  Matrix Y = eig.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nrm = Y.row(i).norm();
    if (deg(i) <= 0.0 || nrm == 0.0)
      Y.row(i).setZero();
    else
      Y.row(i) /= nrm;
  }
  return Y;
}

/// Normalized-cut spectral clustering into k groups.
inline Labels ncut(const Affinity& affinity, int k, std::uint64_t seed) {
  const Eigen::Index n = affinity.size();
  if (n == 0 || affinity.matrix().maxCoeff() <= 0.0) throw Error(ErrorCode::EmptyGraph, "graph has no edges");
  if (k < 1 || k > n) throw Error(ErrorCode::KTooLarge, "k must lie in [1, n]");
  if (k == 1) return Labels(static_cast<std::size_t>(n), 0);
  return kmeans(spectral_embedding(affinity, k), k, seed).labels;
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method).
/// Returns assignment[row] = column.
inline std::vector<int> hungarian(const Eigen::Ref<const Matrix>& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw Error(ErrorCode::NotSquare, "assignment cost must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

/// Fraction of samples labeled correctly under the best one-to-one mapping
/// of predicted to true labels. Segmentation error is 1 minus this.
inline double clustering_accuracy(const Labels& pred, const Labels& truth) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  if (pred.empty()) return 1.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] < 0 || truth[i] < 0) throw Error(ErrorCode::InvalidConfig, "labels must be nonnegative");
  const int k = std::max(label_count(pred), label_count(truth));
  Matrix counts = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < pred.size(); ++i) counts(pred[i], truth[i]) += 1.0;
  const std::vector<int> match = hungarian(-counts);
  double hits = 0.0;
  for (int r = 0; r < k; ++r) hits += counts(r, match[static_cast<std::size_t>(r)]);
  return hits / static_cast<double>(pred.size());
}

}  // namespace frr
