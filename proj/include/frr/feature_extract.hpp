#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "frr/adm.hpp"
#include "frr/linalg.hpp"
#include "frr/matrix_io.hpp"

namespace frr {

/// tfrr1 uses the learned Z itself; tfrr2 an orthonormal basis of range(LR).
enum class Strategy { Tfrr1, Tfrr2 };

inline std::string_view to_string(Strategy s) { return s == Strategy::Tfrr1 ? "tfrr1" : "tfrr2"; }

inline Strategy parse_strategy(std::string_view name) {
  if (name == "tfrr1") return Strategy::Tfrr1;
  if (name == "tfrr2") return Strategy::Tfrr2;
  throw Error(ErrorCode::UnknownKind, "unknown strategy '" + std::string(name) + "'");
}

struct Extractor {
  Strategy strategy = Strategy::Tfrr2;
  Matrix P;  // d x d (tfrr1) or d x r orthonormal (tfrr2)
  Matrix E;  // training corruption, d x n
  SolverConfig config;
  Vector mean;  // empty unless fitted with centering
  bool converged = false;

  Eigen::Index input_dim() const { return P.rows(); }
  Eigen::Index feature_dim() const { return strategy == Strategy::Tfrr1 ? P.rows() : P.cols(); }
};

/// Fits the robust transposed model on the training columns.
inline Extractor fit(const Eigen::Ref<const Matrix>& X_train, const SolverConfig& config, Strategy strategy,
                     bool center = false) {
  require_nonempty(X_train, "training matrix");
  Extractor ex;
  ex.strategy = strategy;
  ex.config = config;
  Matrix X = X_train;
  if (center) {
    ex.mean = X.rowwise().mean();
    X.colwise() -= ex.mean;
  }
  const Solution sol = solve_tfrr(X, config);
  ex.converged = sol.converged;
  ex.E = sol.E;
  if (strategy == Strategy::Tfrr1)
    ex.P = sol.Z;
  else
    ex.P = thin_qr(sol.L * sol.R);
  return ex;
}

/// y = Z x for tfrr1, y = P^T x for tfrr2.
inline Vector transform(const Extractor& ex, const Eigen::Ref<const Vector>& x) {
  if (x.size() != ex.input_dim()) throw Error(ErrorCode::ShapeMismatch, "sample length differs from extractor input");
  Vector v = x;
  if (ex.mean.size() == v.size()) v -= ex.mean;
  if (ex.strategy == Strategy::Tfrr1) return ex.P * v;
  return ex.P.transpose() * v;
}

/// Column-wise transform of a d x n sample matrix.
inline Matrix transform_columns(const Extractor& ex, const Eigen::Ref<const Matrix>& X) {
  if (X.rows() != ex.input_dim()) throw Error(ErrorCode::ShapeMismatch, "sample length differs from extractor input");
  Matrix V = X;
  if (ex.mean.size() == V.rows()) V.colwise() -= ex.mean;
  if (ex.strategy == Strategy::Tfrr1) return ex.P * V;
  return ex.P.transpose() * V;
}

inline std::vector<double> column_energies(const Eigen::Ref<const Matrix>& E) {
  std::vector<double> out(static_cast<std::size_t>(E.cols()));
  for (Eigen::Index j = 0; j < E.cols(); ++j) out[static_cast<std::size_t>(j)] = E.col(j).norm();
  return out;
}

/// Column i is an outlier iff ||E_i||_2 >= gamma.
inline Mask detect_outliers(const Eigen::Ref<const Matrix>& E, double gamma) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "gamma must be nonnegative");
  Mask mask(static_cast<std::size_t>(E.cols()));
  for (Eigen::Index j = 0; j < E.cols(); ++j) mask[static_cast<std::size_t>(j)] = E.col(j).norm() >= gamma;
  return mask;
}

/// Midpoint of the widest gap between consecutive sorted energies. With
/// fewer than two energies, returns +inf (nothing flagged).
inline double energy_gap_threshold(std::vector<double> energies) {
  if (energies.size() < 2) return std::numeric_limits<double>::infinity();
  std::sort(energies.begin(), energies.end());
  std::size_t at = 0;
  double widest = -1.0;
  for (std::size_t i = 0; i + 1 < energies.size(); ++i) {
    const double gap = energies[i + 1] - energies[i];
    if (gap > widest) {
      widest = gap;
      at = i;
    }
  }
  return 0.5 * (energies[at] + energies[at + 1]);
}

/// 1-NN under Euclidean distance; ties go to the lowest gallery index.
inline Labels nn_classify(const Eigen::Ref<const Matrix>& gallery, const Labels& gallery_labels,
                          const Eigen::Ref<const Matrix>& probes) {
  if (gallery.cols() == 0) throw Error(ErrorCode::EmptyGallery, "gallery has no samples");
  if (static_cast<std::size_t>(gallery.cols()) != gallery_labels.size())
    throw Error(ErrorCode::ShapeMismatch, "gallery label count differs from gallery size");
  if (gallery.rows() != probes.rows()) throw Error(ErrorCode::ShapeMismatch, "feature dimensions differ");
  Labels out(static_cast<std::size_t>(probes.cols()));
  for (Eigen::Index q = 0; q < probes.cols(); ++q) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index g = 0; g < gallery.cols(); ++g) {
      const double dist = (gallery.col(g) - probes.col(q)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = g;
      }
    }
    out[static_cast<std::size_t>(q)] = gallery_labels[static_cast<std::size_t>(best)];
  }
  return out;
}

// On disk: P.frrm, E.frrm, optional mean.frrm, and extractor.txt with
// key=value lines.
inline void save_extractor(const Extractor& ex, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix(ex.P, dir / "P.frrm");
  write_matrix(ex.E, dir / "E.frrm");
  if (ex.mean.size() > 0) write_matrix(Matrix(ex.mean), dir / "mean.frrm");
  std::ofstream meta(dir / "extractor.txt");
  if (!meta) throw Error(ErrorCode::IoError, "cannot write extractor metadata");
  meta.precision(17);
  const SolverConfig& c = ex.config;
  meta << "strategy=" << to_string(ex.strategy) << '\n'
       << "m=" << c.m << '\n'
       << "mu=" << c.mu << '\n'
       << "beta0=" << c.beta0 << '\n'
       << "beta_max=" << c.beta_max << '\n'
       << "rho=" << c.rho << '\n'
       << "eps1=" << c.eps1 << '\n'
       << "eps2=" << c.eps2 << '\n'
       << "max_iter=" << c.max_iter << '\n'
       << "seed=" << c.seed << '\n'
       << "centered=" << (ex.mean.size() > 0 ? 1 : 0) << '\n'
       << "converged=" << (ex.converged ? 1 : 0) << '\n';
}

inline Extractor load_extractor(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "extractor.txt");
  if (!meta) throw Error(ErrorCode::IoError, "missing " + (dir / "extractor.txt").string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::ParseError, "extractor metadata missing '" + key + "'");
    return it->second;
  };
  Extractor ex;
  try {
    ex.strategy = parse_strategy(get("strategy"));
    ex.config.m = std::stol(get("m"));
    ex.config.mu = std::stod(get("mu"));
    ex.config.beta0 = std::stod(get("beta0"));
    ex.config.beta_max = std::stod(get("beta_max"));
    ex.config.rho = std::stod(get("rho"));
    ex.config.eps1 = std::stod(get("eps1"));
    ex.config.eps2 = std::stod(get("eps2"));
    ex.config.max_iter = std::stoi(get("max_iter"));
    ex.config.seed = std::stoull(get("seed"));
    ex.converged = get("converged") == "1";
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::ParseError, std::string("extractor metadata: ") + e.what());
  }
  ex.P = read_matrix(dir / "P.frrm");
  ex.E = read_matrix(dir / "E.frrm");
  if (get("centered") == "1") ex.mean = read_matrix(dir / "mean.frrm").col(0);
  return ex;
}

}  // namespace frr
