#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "frr/linalg.hpp"
#include "frr/prox.hpp"

namespace frr {

/// Which slices of E the l2,1 penalty groups together.
enum class GroupAxis { Columns, Rows };

/// Hyperparameters of the ADM solver. Defaults are tuned starting points on
/// the synthetic generator, not published values.
struct SolverConfig {
  Eigen::Index m = 1;
  double mu = 0.5;
  double beta0 = 1e-3;
  double beta_max = 1e10;
  double rho = 1.5;
  double eps1 = 1e-6;
  double eps2 = 1e-6;
  int max_iter = 1000;
  std::uint64_t seed = 0;
  bool normalize_columns = true;
  GroupAxis penalty_axis = GroupAxis::Columns;
  std::optional<std::string> trace_path;

  void validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
    if (m < 1) fail("m must be >= 1");
    if (!(mu > 0.0)) fail("mu must be > 0");
    if (!(beta0 > 0.0)) fail("beta0 must be > 0");
    if (!(beta_max >= beta0)) fail("beta_max must be >= beta0");
    if (!(rho > 1.0)) fail("rho must be > 1");
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) fail("eps1 and eps2 must be > 0");
    if (max_iter < 1) fail("max_iter must be >= 1");
  }
};

enum class Model { Frr, Tfrr };

struct IterationRecord {
  int iter = 0;
  double beta = 0.0;  // penalty used during this iteration
  double objective = 0.0;
  double primal_residual = 0.0;
  double norm_residual = 0.0;
  // ||M Z+ - B||_F / ||B||_F for the Z-subproblem; filled only when an
  // observer is attached.
  double linear_residual = 0.0;
};

struct Solution {
  Model model = Model::Frr;
  Matrix Z;
  Matrix L;
  Matrix R;
  Matrix E;
  Matrix lambda;
  Matrix pi;  // 1 x n; empty when the column-sum constraint is off
  int iterations = 0;
  double primal_residual = 0.0;
  double norm_residual = 0.0;
  double objective = 0.0;
  double final_beta = 0.0;
  bool converged = false;
  std::vector<IterationRecord> history;

  Matrix LR() const { return L * R; }
};

using IterationObserver = std::function<void(const IterationRecord&)>;

namespace detail {

inline double l21(const Matrix& E, GroupAxis axis) {
  return axis == GroupAxis::Columns ? E.colwise().norm().sum() : E.rowwise().norm().sum();
}

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  return G;
}

// Extend Q (n x q, orthonormal) to n x m with random orthonormal columns.
inline Matrix pad_basis(Matrix Q, Eigen::Index m, std::mt19937_64& rng) {
  const Eigen::Index n = Q.rows();
  while (Q.cols() < m) {
    Matrix G = gaussian(n, m - Q.cols(), rng);
    if (Q.cols() > 0) G -= Q * (Q.transpose() * G);
    Matrix extra = thin_qr(G);
    if (extra.cols() > 0 && Q.cols() > 0) extra -= Q * (Q.transpose() * extra);  // re-orthogonalize
    extra = thin_qr(extra);
    Matrix grown(n, Q.cols() + extra.cols());
    grown << Q, extra;
    Q = std::move(grown);
  }
  return Q.leftCols(m);
}

// Core iteration for min ||Z - LR||^2 + mu ||E||_{2,1} s.t. X = XZ + E
// (and 1^T Z = 1^T when normalize_columns).
inline Solution solve_adm(const Matrix& X, const SolverConfig& cfg, const IterationObserver& observer) {
  require_nonempty(X, "X");
  require_finite(X, "X");
  cfg.validate();
  const Eigen::Index d = X.rows();
  const Eigen::Index n = X.cols();
  const Eigen::Index m = cfg.m;
  if (m > n) throw Error(ErrorCode::InvalidConfig, "m exceeds the number of samples");
  const bool norm_on = cfg.normalize_columns;

  std::mt19937_64 rng(cfg.seed);
  Matrix Z = Matrix::Identity(n, n);
  Matrix E = Matrix::Zero(d, n);
  Matrix Lam = Matrix::Zero(d, n);
  Matrix Pi = norm_on ? Matrix::Zero(1, n) : Matrix();
  Matrix R = thin_qr(gaussian(n, m, rng));
  R = pad_basis(std::move(R), m, rng).transpose();
  Matrix L = Z * R.transpose();

  const Matrix XtX = X.transpose() * X;
  const Matrix ones = Matrix::Ones(n, n);
  const Matrix ones_row = Matrix::Ones(1, n);
  const double blowup = 1e12 * std::max(1.0, X.norm());

  std::optional<std::ofstream> trace;
  if (cfg.trace_path) {
    trace.emplace(*cfg.trace_path);
    if (!*trace) throw Error(ErrorCode::IoError, "cannot open trace file " + *cfg.trace_path);
    *trace << "iter,beta,objective,primal_residual,norm_residual\n";
    trace->precision(17);
  }

  Solution sol;
  double beta = cfg.beta0;
  double factored_beta = -1.0;
  Eigen::LLT<Matrix> system;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    // L, R via the QR projection onto range(Z R^T).
    Matrix Q = thin_qr(Z * R.transpose());
    if (Q.cols() < m) Q = pad_basis(std::move(Q), m, rng);
    L = Q;
    R = Q.transpose() * Z;
    const Matrix LR = L * R;

    // Z-subproblem: (2I + beta (X^T X + 1 1^T)) Z = B.
    if (beta != factored_beta) {
      Matrix M = 2.0 * Matrix::Identity(n, n) + beta * XtX;
      if (norm_on) M += beta * ones;
      system.compute(M);
      if (system.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "Z-update system not positive definite");
      factored_beta = beta;
    }
    Matrix B = 2.0 * LR + beta * XtX - X.transpose() * (beta * E - Lam);
    if (norm_on) B += beta * ones - Matrix::Ones(n, 1) * Pi;
    Z = system.solve(B);

    const Matrix XZ = X * Z;
    const Matrix C = X - XZ + Lam / beta;
    E = cfg.penalty_axis == GroupAxis::Columns ? prox_l21(C, cfg.mu / beta) : prox_l21_rows(C, cfg.mu / beta);

    const Matrix primal = X - XZ - E;
    Lam += beta * primal;
    double norm_res = 0.0;
    if (norm_on) {
      const Matrix colsum = ones_row * Z - ones_row;
      Pi += beta * colsum;
      norm_res = colsum.cwiseAbs().maxCoeff();
    }

    IterationRecord rec;
    rec.iter = it;
    rec.beta = beta;
    rec.objective = (Z - LR).squaredNorm() + cfg.mu * l21(E, cfg.penalty_axis);
    rec.primal_residual = primal.cwiseAbs().maxCoeff();
    rec.norm_residual = norm_res;
    if (observer) {
      Matrix M = 2.0 * Matrix::Identity(n, n) + beta * XtX;
      if (norm_on) M += beta * ones;
      const double bn = B.norm();
      rec.linear_residual = (M * Z - B).norm() / (bn > 0.0 ? bn : 1.0);
      observer(rec);
    }
    if (trace)
      *trace << rec.iter << ',' << rec.beta << ',' << rec.objective << ',' << rec.primal_residual << ','
             << rec.norm_residual << '\n';
    sol.history.push_back(rec);

    beta = std::min(cfg.beta_max, cfg.rho * beta);

    if (!Z.allFinite() || !E.allFinite() || !L.allFinite() || !R.allFinite() || !Lam.allFinite() ||
        Z.norm() > blowup || E.norm() > blowup || R.norm() > blowup)
      throw Error(ErrorCode::NonFinite, "iterates diverged at iteration " + std::to_string(it));

    sol.iterations = it;
    sol.primal_residual = rec.primal_residual;
    sol.norm_residual = rec.norm_residual;
    if (rec.primal_residual <= cfg.eps1 && (!norm_on || norm_res <= cfg.eps2)) {
      sol.converged = true;
      break;
    }
  }

  sol.Z = std::move(Z);
  sol.L = std::move(L);
  sol.R = std::move(R);
  sol.E = std::move(E);
  sol.lambda = std::move(Lam);
  sol.pi = std::move(Pi);
  sol.final_beta = beta;
  sol.objective = (sol.Z - sol.L * sol.R).squaredNorm() + cfg.mu * l21(sol.E, cfg.penalty_axis);
  return sol;
}

}  // namespace detail

/// Robust fixed-rank representation:
///   min ||Z - LR||_F^2 + mu ||E||_{2,1}  s.t.  X = XZ + E, 1^T Z = 1^T.
///
/// Iteration order per step: L, R by QR of Z R^T; Z from the regularized
/// normal equations (factorization cached while beta is unchanged); E by
/// group shrinkage; multiplier ascent; beta <- min(beta_max, rho beta).
/// Stops when ||X - XZ - E||_inf <= eps1 and, if the column-sum constraint
/// is active, ||1^T Z - 1^T||_inf <= eps2. Running out of iterations is not
/// an error; the result carries converged = false.
///
/// Initialization: Z = I, E = Lambda = Pi = 0, R with seeded random
/// orthonormal rows, L = Z R^T.
inline Solution solve_frr(const Eigen::Ref<const Matrix>& X, const SolverConfig& config,
                          const IterationObserver& observer = {}) {
  Solution s = detail::solve_adm(Matrix(X), config, observer);
  s.model = Model::Frr;
  return s;
}

/// Robust transposed model: min ||Z - LR||^2 + mu ||E||_{2,1} s.t. X = ZX + E
/// with Z d x d. Solved as the column-space problem on X^T without the
/// column-sum constraint; the l2,1 groups are the columns (samples) of E.
inline Solution solve_tfrr(const Eigen::Ref<const Matrix>& X, const SolverConfig& config,
                           const IterationObserver& observer = {}) {
  SolverConfig cfg = config;
  cfg.normalize_columns = false;
  cfg.penalty_axis = config.penalty_axis == GroupAxis::Columns ? GroupAxis::Rows : GroupAxis::Columns;
  Solution t = detail::solve_adm(Matrix(X.transpose()), cfg, observer);

  Solution s;
  s.model = Model::Tfrr;
  s.Z = t.Z.transpose();
  // Z^T ~ L_t R_t  =>  Z ~ R_t^T L_t^T.
  s.L = t.R.transpose();
  s.R = t.L.transpose();
  s.E = t.E.transpose();
  s.lambda = t.lambda.transpose();
  s.iterations = t.iterations;
  s.primal_residual = t.primal_residual;
  s.norm_residual = 0.0;
  s.objective = t.objective;
  s.final_beta = t.final_beta;
  s.converged = t.converged;
  s.history = std::move(t.history);
  return s;
}

struct Diagnostics {
  double objective = 0.0;
  double primal_residual = 0.0;
  double norm_residual = 0.0;
  std::vector<double> e_column_energies;
};

/// Recomputes the reported quantities of `sol` directly from X and the
/// factors, without trusting the solver's own bookkeeping.
inline Diagnostics diagnostics(const Eigen::Ref<const Matrix>& X, const Solution& sol, const SolverConfig& config) {
  const bool frr = sol.model == Model::Frr;
  const Eigen::Index zdim = frr ? X.cols() : X.rows();
  if (sol.Z.rows() != zdim || sol.Z.cols() != zdim || sol.E.rows() != X.rows() || sol.E.cols() != X.cols() ||
      sol.L.rows() != zdim || sol.R.cols() != zdim || sol.L.cols() != sol.R.rows())
    throw Error(ErrorCode::ShapeMismatch, "solution shapes do not match X");

  // The transposed model always groups E by sample columns unless the caller
  // flipped the axis.
  GroupAxis axis = config.penalty_axis;
  Diagnostics out;
  out.objective = (sol.Z - sol.L * sol.R).squaredNorm() + config.mu * detail::l21(sol.E, axis);
  const Matrix primal = frr ? Matrix(X - X * sol.Z - sol.E) : Matrix(X - sol.Z * X - sol.E);
  out.primal_residual = primal.size() ? primal.cwiseAbs().maxCoeff() : 0.0;
  if (frr && config.normalize_columns) {
    const Matrix colsum = Matrix::Ones(1, zdim) * sol.Z - Matrix::Ones(1, zdim);
    out.norm_residual = colsum.cwiseAbs().maxCoeff();
  }
  out.e_column_energies.resize(static_cast<std::size_t>(sol.E.cols()));
  for (Eigen::Index j = 0; j < sol.E.cols(); ++j) out.e_column_energies[static_cast<std::size_t>(j)] = sol.E.col(j).norm();
  return out;
}

}  // namespace frr
