#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "frr/error.hpp"

namespace frr {

// Column-major dense storage; matches the on-disk payload order.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cluster assignment per sample, values in [0, k).
using Labels = std::vector<int>;

using Mask = std::vector<bool>;

inline void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
}

inline void require_nonempty(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (m.size() == 0) throw Error(ErrorCode::EmptyMatrix, std::string(what) + " is empty");
}

/// Number of distinct clusters implied by a label vector (max label + 1).
inline int label_count(const Labels& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  return k;
}

}  // namespace frr
