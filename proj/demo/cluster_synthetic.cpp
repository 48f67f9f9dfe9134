// Insufficient-sampling demo: clustering with Z versus L R on synthetic data.

#include <iostream>

#include "frr/frr.hpp"

int main() {
  const frr::SyntheticData data = frr::generate({10, 10, 100, 50, 7});
  std::cout << "X is " << data.X.rows() << "x" << data.X.cols() << ", rank " << frr::numerical_rank(data.X) << "\n";

  const frr::ClosedFormSolution cf = frr::frr_closed_form(data.X, 10);
  const frr::Matrix LR = cf.L * cf.R;
  for (auto [name, src] : {std::pair{"Z", frr::AffinitySource::Z}, std::pair{"LR", frr::AffinitySource::LR}}) {
    const frr::Labels labels = frr::cluster_representation(cf.Z, LR, src, 10, 1);
    std::cout << "closed form, " << name << " affinity: accuracy " << frr::clustering_accuracy(labels, data.truth)
              << "\n";
  }

  frr::SolverConfig cfg;
  cfg.m = 10;
  const frr::Solution sol = frr::solve_frr(data.X, cfg);
  const frr::Labels labels = frr::cluster_representation(sol.Z, sol.LR(), frr::AffinitySource::LR, 10, 1);
  std::cout << "ADM (" << sol.iterations << " iterations), LR affinity: accuracy "
            << frr::clustering_accuracy(labels, data.truth) << "\n";
}
