#pragma once

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "frr/adm.hpp"
#include "frr/closed_form.hpp"
#include "frr/seeding.hpp"
#include "frr/spectral.hpp"
#include "frr/synthgen.hpp"

namespace frr {

enum class AffinitySource { Z, LR };

/// Cluster from a representation (Z) or its low-rank part (L R).
inline Labels cluster_representation(const Matrix& Z, const Matrix& LR, AffinitySource source, int k,
                                     std::uint64_t seed) {
  return ncut(build_affinity(source == AffinitySource::Z ? Z : LR), k, seed);
}

enum class SolverKind { ClosedForm, Adm };

struct SweepCell {
  int p = 0;
  std::uint64_t seed = 0;
  double accuracy_z = 0.0;
  double accuracy_lr = 0.0;
};

struct SweepPlan {
  int k = 10;
  int d_h = 100;
  int d_l = 50;
  std::vector<int> p_values{10, 15, 20, 25, 30};
  std::vector<std::uint64_t> seeds;
  Eigen::Index m = 0;  // 0 means m = k
  SolverKind solver = SolverKind::ClosedForm;
  SolverConfig config;  // used when solver == Adm (m overridden)
};

/// One (p, seed) cell: generate data, recover (Z, LR), cluster both ways.
inline SweepCell run_sweep_cell(const SweepPlan& plan, int p, std::uint64_t seed) {
  const SyntheticData data = generate({plan.k, p, plan.d_h, plan.d_l, seed});
  const Eigen::Index m = plan.m > 0 ? plan.m : plan.k;
  Matrix Z, LR;
  if (plan.solver == SolverKind::ClosedForm) {
    ClosedFormSolution cf = frr_closed_form(data.X, m);
    LR = cf.L * cf.R;
    Z = std::move(cf.Z);
  } else {
    SolverConfig cfg = plan.config;
    cfg.m = m;
    cfg.seed = derive_seed(seed, 1);
    Solution sol = solve_frr(data.X, cfg);
    LR = sol.LR();
    Z = std::move(sol.Z);
  }
  const std::uint64_t ncut_seed = derive_seed(seed, 2);
  SweepCell cell;
  cell.p = p;
  cell.seed = seed;
  cell.accuracy_z = clustering_accuracy(cluster_representation(Z, LR, AffinitySource::Z, plan.k, ncut_seed), data.truth);
  cell.accuracy_lr = clustering_accuracy(cluster_representation(Z, LR, AffinitySource::LR, plan.k, ncut_seed), data.truth);
  return cell;
}

/// All cells, ordered by (p, seed).
inline std::vector<SweepCell> run_sweep(const SweepPlan& plan) {
  std::vector<SweepCell> cells;
  for (int p : plan.p_values)
    for (std::uint64_t s : plan.seeds) cells.push_back(run_sweep_cell(plan, p, s));
  std::sort(cells.begin(), cells.end(),
            [](const SweepCell& a, const SweepCell& b) { return std::tie(a.p, a.seed) < std::tie(b.p, b.seed); });
  return cells;
}

}  // namespace frr
