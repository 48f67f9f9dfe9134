// Command-line front end: synthetic data, solvers, clustering, evaluation and
// feature extraction. Every run writes manifest.json into its output dir.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frr/frr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNotConverged = 3;

struct SolverFlags {
  long m = 0;
  double mu = frr::SolverConfig{}.mu;
  double beta0 = frr::SolverConfig{}.beta0;
  double beta_max = frr::SolverConfig{}.beta_max;
  double rho = frr::SolverConfig{}.rho;
  double eps1 = frr::SolverConfig{}.eps1;
  double eps2 = frr::SolverConfig{}.eps2;
  int max_iter = frr::SolverConfig{}.max_iter;
  bool no_normalize = false;

  void attach(CLI::App* app, bool with_m = true) {
    if (with_m) app->add_option("--m", m, "target rank of L R");
    app->add_option("--mu", mu, "corruption weight")->capture_default_str();
    app->add_option("--beta0", beta0, "initial penalty")->capture_default_str();
    app->add_option("--beta-max", beta_max, "penalty cap")->capture_default_str();
    app->add_option("--rho", rho, "penalty growth factor")->capture_default_str();
    app->add_option("--eps1", eps1, "primal tolerance")->capture_default_str();
    app->add_option("--eps2", eps2, "column-sum tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
    app->add_flag("--no-normalize", no_normalize, "drop the 1^T Z = 1^T constraint");
  }

  frr::SolverConfig config(std::uint64_t seed) const {
    frr::SolverConfig c;
    c.m = m;
    c.mu = mu;
    c.beta0 = beta0;
    c.beta_max = beta_max;
    c.rho = rho;
    c.eps1 = eps1;
    c.eps2 = eps2;
    c.max_iter = max_iter;
    c.seed = seed;
    c.normalize_columns = !no_normalize;
    return c;
  }
};

json config_json(const frr::SolverConfig& c) {
  return json{{"m", c.m},           {"mu", c.mu},       {"beta0", c.beta0},       {"beta_max", c.beta_max},
              {"rho", c.rho},       {"eps1", c.eps1},   {"eps2", c.eps2},         {"max_iter", c.max_iter},
              {"seed", c.seed},     {"normalize_columns", c.normalize_columns}};
}

json solution_json(const frr::Solution& s) {
  return json{{"converged", s.converged},         {"iterations", s.iterations},
              {"primal_residual", s.primal_residual}, {"norm_residual", s.norm_residual},
              {"objective", s.objective},         {"final_beta", s.final_beta}};
}

class Run {
 public:
  Run(std::string command, fs::path out, std::vector<std::string> argv)
      : command_(std::move(command)), out_(std::move(out)), start_(std::chrono::steady_clock::now()) {
    manifest_["command"] = command_;
    manifest_["argv"] = std::move(argv);
    manifest_["tool_version"] = frr::kVersion;
    manifest_["outputs"] = json::array();
    fs::create_directories(out_);
  }

  json& manifest() { return manifest_; }
  fs::path path(const std::string& name) const { return out_ / name; }

  void matrix(const frr::Matrix& M, const std::string& name, frr::MatrixFormat fmt) {
    const std::string file = name + (fmt == frr::MatrixFormat::Csv ? ".csv" : ".frrm");
    frr::write_matrix(M, out_ / file, fmt);
    manifest_["outputs"].push_back(file);
  }

  void labels(const frr::Labels& l, const std::string& file) {
    frr::write_labels(l, out_ / file);
    manifest_["outputs"].push_back(file);
  }

  void note_output(const std::string& file) { manifest_["outputs"].push_back(file); }

  void finish() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest_["wall_clock_seconds"] = std::chrono::duration<double>(elapsed).count();
    std::ofstream f(out_ / "manifest.json");
    if (!f) throw frr::Error(frr::ErrorCode::IoError, "cannot write manifest");
    f << manifest_.dump(2) << '\n';
  }

 private:
  std::string command_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  json manifest_;
};

frr::MatrixFormat parse_format(const std::string& s) {
  return s == "csv" ? frr::MatrixFormat::Csv : frr::MatrixFormat::Binary;
}

int finish_solver_run(Run& run, const frr::Solution& sol, bool strict) {
  run.manifest()["result"] = solution_json(sol);
  run.finish();
  if (!sol.converged) {
    std::cerr << "warning: solver stopped after " << sol.iterations << " iterations without converging\n";
    if (strict) return kExitNotConverged;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-rank representation: subspace clustering and robust feature extraction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", frr::kVersion);
  std::vector<std::string> args(argv, argv + argc);

  std::string out = "run";
  std::string format = "frrm";
  std::uint64_t seed = 0;
  bool strict = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--format", format, "matrix format for outputs")
        ->check(CLI::IsMember({"csv", "frrm"}))
        ->capture_default_str();
  };

  // gen
  frr::SyntheticSpec spec;
  int outliers = 0;
  std::optional<double> magnitude;
  bool shuffle = false;
  auto* gen = app.add_subcommand("gen", "generate synthetic independent-subspace data");
  gen->add_option("--k", spec.k, "number of subspaces")->required();
  gen->add_option("--p", spec.p, "points per subspace")->required();
  gen->add_option("--dh", spec.d_h, "ambient dimension")->required();
  gen->add_option("--dl", spec.d_l, "subspace dimension")->required();
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--outliers", outliers, "number of appended outlier columns")->capture_default_str();
  gen->add_option("--magnitude", magnitude, "outlier entry range [0, magnitude] (default 10x max column norm)");
  gen->add_flag("--shuffle", shuffle, "permute columns (permutation recorded in perm.txt)");
  common(gen);

  // solve
  std::string input;
  std::string mode = "frr";
  std::string trace;
  SolverFlags sflags;
  auto* solve = app.add_subcommand("solve", "run the robust ADM solver");
  solve->add_option("--input", input, "data matrix X (d x n)")->required();
  solve->add_option("--mode", mode)->check(CLI::IsMember({"frr", "tfrr"}))->capture_default_str();
  solve->add_option("--seed", seed)->capture_default_str();
  solve->add_option("--trace", trace, "write per-iteration CSV trace to this file name in --out");
  solve->add_flag("--strict", strict, "exit 3 if the solver does not converge");
  sflags.attach(solve);
  solve->get_option("--m")->required();
  common(solve);

  // cluster
  std::string solution_dir;
  int k = 0;
  std::string affinity = "lr";
  std::string solver = "adm";
  auto* cluster = app.add_subcommand("cluster", "subspace clustering: solve, build affinity, NCut");
  auto* cin = cluster->add_option("--input", input, "data matrix X");
  auto* csol = cluster->add_option("--solution", solution_dir, "directory from a previous 'solve' run");
  cin->excludes(csol);
  cluster->add_option("--k", k, "number of clusters")->required();
  cluster->add_option("--affinity", affinity)->check(CLI::IsMember({"z", "lr"}))->capture_default_str();
  cluster->add_option("--solver", solver, "how to obtain (Z, L, R) from --input")
      ->check(CLI::IsMember({"adm", "closed"}))
      ->capture_default_str();
  cluster->add_option("--seed", seed)->capture_default_str();
  cluster->add_flag("--strict", strict, "exit 3 if the solver does not converge");
  SolverFlags cflags;
  cflags.attach(cluster);
  common(cluster);

  // eval
  std::string pred_path, truth_path;
  auto* eval = app.add_subcommand("eval", "score predicted labels against ground truth");
  eval->add_option("--pred", pred_path)->required();
  eval->add_option("--truth", truth_path)->required();

  // extract
  std::string train;
  std::string strategy = "tfrr2";
  bool center = false;
  SolverFlags eflags;
  auto* extract = app.add_subcommand("extract", "fit a robust transposed-model feature extractor");
  extract->add_option("--train", train, "training matrix (d x n)")->required();
  extract->add_option("--strategy", strategy)->check(CLI::IsMember({"tfrr1", "tfrr2"}))->capture_default_str();
  extract->add_option("--seed", seed)->capture_default_str();
  extract->add_flag("--center", center, "subtract the training mean before fitting and transforming");
  extract->add_flag("--strict", strict, "exit 3 if the solver does not converge");
  eflags.attach(extract);
  extract->get_option("--m")->required();
  common(extract);

  // transform
  std::string extractor_dir;
  auto* transform = app.add_subcommand("transform", "map samples through a fitted extractor");
  transform->add_option("--extractor", extractor_dir)->required();
  transform->add_option("--input", input)->required();
  common(transform);

  // detect
  std::optional<double> gamma;
  auto* detect = app.add_subcommand("detect", "flag outlier samples by corruption energy");
  detect->add_option("--extractor", extractor_dir)->required();
  detect->add_option("--gamma", gamma, "energy threshold (default: midpoint of widest energy gap)");
  common(detect);

  // closed-form
  long cf_m = 0;
  std::string cf_mode = "frr";
  auto* closed = app.add_subcommand("closed-form", "noiseless closed-form factors");
  closed->add_option("--input", input)->required();
  closed->add_option("--m", cf_m, "target rank (ignored for sim)");
  closed->add_option("--mode", cf_mode)->check(CLI::IsMember({"frr", "tfrr", "sim", "pca"}))->capture_default_str();
  common(closed);

  // sweep
  std::string sweep_spec;
  auto* sweep = app.add_subcommand("sweep", "accuracy-vs-p sweep on synthetic data");
  sweep->add_option("--spec", sweep_spec, "JSON sweep description")->required();
  common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const frr::MatrixFormat fmt = parse_format(format);

  try {
    if (*gen) {
      Run run("gen", out, args);
      spec.seed = seed;
      frr::SyntheticData data = frr::generate(spec);
      for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
      frr::Matrix X = data.X;
      frr::Labels truth = data.truth;
      frr::Mask mask(static_cast<std::size_t>(X.cols()), false);
      double mag = 0.0;
      if (outliers > 0) {
        mag = magnitude.value_or(10.0 * X.colwise().norm().maxCoeff());
        frr::CorruptedData c = frr::inject_outliers(X, outliers, mag, frr::derive_seed(seed, 1));
        X = std::move(c.X);
        mask = std::move(c.mask);
        truth.insert(truth.end(), static_cast<std::size_t>(outliers), spec.k);
      }
      if (shuffle) {
        const auto perm = frr::shuffle_permutation(X.cols(), frr::derive_seed(seed, 2));
        X = frr::permute_columns(X, perm);
        frr::Labels t2(truth.size());
        frr::Mask m2(mask.size());
        for (std::size_t j = 0; j < perm.size(); ++j) {
          t2[j] = truth[static_cast<std::size_t>(perm[j])];
          m2[j] = mask[static_cast<std::size_t>(perm[j])];
        }
        truth = std::move(t2);
        mask = std::move(m2);
        run.labels(frr::Labels(perm.begin(), perm.end()), "perm.txt");
      }
      run.matrix(X, "X", fmt);
      run.labels(truth, "truth.txt");
      frr::write_mask(mask, run.path("mask.txt"));
      run.note_output("mask.txt");
      run.manifest()["params"] = {{"k", spec.k},        {"p", spec.p},         {"d_h", spec.d_h},
                                  {"d_l", spec.d_l},    {"seed", seed},        {"outliers", outliers},
                                  {"magnitude", mag},   {"shuffle", shuffle},  {"format", format}};
      run.manifest()["seed"] = seed;
      run.manifest()["result"] = {{"rows", X.rows()}, {"cols", X.cols()}, {"rank", frr::numerical_rank(X)}};
      run.finish();
      std::cout << "X: " << X.rows() << "x" << X.cols() << " rank=" << frr::numerical_rank(X) << '\n';
      return 0;
    }

    if (*solve) {
      Run run("solve", out, args);
      const frr::Matrix X = frr::read_matrix(input);
      frr::SolverConfig cfg = sflags.config(seed);
      if (!trace.empty()) {
        cfg.trace_path = run.path(trace).string();
        run.note_output(trace);
      }
      const frr::Solution sol = mode == "frr" ? frr::solve_frr(X, cfg) : frr::solve_tfrr(X, cfg);
      run.matrix(sol.Z, "Z", fmt);
      run.matrix(sol.L, "L", fmt);
      run.matrix(sol.R, "R", fmt);
      run.matrix(sol.E, "E", fmt);
      json params = config_json(cfg);
      params["mode"] = mode;
      params["input"] = input;
      params["format"] = format;
      if (!trace.empty()) params["trace"] = trace;
      run.manifest()["params"] = params;
      run.manifest()["seed"] = seed;
      std::cout << "converged=" << (sol.converged ? "true" : "false") << " iterations=" << sol.iterations
                << " objective=" << sol.objective << '\n';
      return finish_solver_run(run, sol, strict);
    }

    if (*cluster) {
      if (input.empty() && solution_dir.empty()) {
        std::cerr << "cluster: one of --input or --solution is required\n";
        return kExitUsage;
      }
      Run run("cluster", out, args);
      json params{{"k", k}, {"affinity", affinity}, {"seed", seed}, {"format", format}};
      frr::Matrix Z, LR;
      std::optional<frr::Solution> sol;
      if (!solution_dir.empty()) {
        const fs::path dir(solution_dir);
        auto load = [&](const char* name) {
          const fs::path csv = dir / (std::string(name) + ".csv");
          return frr::read_matrix(fs::exists(csv) ? csv : dir / (std::string(name) + ".frrm"));
        };
        Z = load("Z");
        LR = load("L") * load("R");
        params["solution"] = solution_dir;
      } else {
        const frr::Matrix X = frr::read_matrix(input);
        if (cflags.m == 0) cflags.m = k;
        params["input"] = input;
        params["solver"] = solver;
        if (solver == "closed") {
          const frr::ClosedFormSolution cf = frr::frr_closed_form(X, cflags.m);
          Z = cf.Z;
          LR = cf.L * cf.R;
          params["m"] = cflags.m;
        } else {
          const frr::SolverConfig cfg = cflags.config(frr::derive_seed(seed, 1));
          sol = frr::solve_frr(X, cfg);
          Z = sol->Z;
          LR = sol->LR();
          params["solver_config"] = config_json(cfg);
        }
      }
      const frr::Labels labels = frr::cluster_representation(
          Z, LR, affinity == "z" ? frr::AffinitySource::Z : frr::AffinitySource::LR, k, frr::derive_seed(seed, 2));
      run.labels(labels, "labels.txt");
      run.manifest()["params"] = params;
      run.manifest()["seed"] = seed;
      if (sol) return finish_solver_run(run, *sol, strict);
      run.finish();
      return 0;
    }

    if (*eval) {
      const frr::Labels pred = frr::read_labels(pred_path);
      const frr::Labels truth = frr::read_labels(truth_path);
      const double acc = frr::clustering_accuracy(pred, truth);
      std::cout.precision(17);
      std::cout << "clustering accuracy " << acc << ", segmentation error " << 1.0 - acc << '\n';
      std::cout << "accuracy=" << acc << '\n' << "error=" << 1.0 - acc << '\n';
      return 0;
    }

    if (*extract) {
      Run run("extract", out, args);
      const frr::Matrix X = frr::read_matrix(train);
      frr::SolverConfig cfg = eflags.config(seed);
      const frr::Extractor ex = frr::fit(X, cfg, frr::parse_strategy(strategy), center);
      frr::save_extractor(ex, out);
      for (const char* f : {"P.frrm", "E.frrm", "extractor.txt"}) run.note_output(f);
      if (center) run.note_output("mean.frrm");
      json params = config_json(cfg);
      params["train"] = train;
      params["strategy"] = strategy;
      params["center"] = center;
      run.manifest()["params"] = params;
      run.manifest()["seed"] = seed;
      run.manifest()["result"] = {{"converged", ex.converged}, {"feature_dim", ex.feature_dim()}};
      run.finish();
      if (!ex.converged) {
        std::cerr << "warning: solver did not converge\n";
        if (strict) return kExitNotConverged;
      }
      std::cout << "feature_dim=" << ex.feature_dim() << '\n';
      return 0;
    }

    if (*transform) {
      Run run("transform", out, args);
      const frr::Extractor ex = frr::load_extractor(extractor_dir);
      const frr::Matrix X = frr::read_matrix(input);
      run.matrix(frr::transform_columns(ex, X), "features", fmt);
      run.manifest()["params"] = {{"extractor", extractor_dir}, {"input", input}, {"format", format}};
      run.finish();
      return 0;
    }

    if (*detect) {
      Run run("detect", out, args);
      const frr::Extractor ex = frr::load_extractor(extractor_dir);
      const std::vector<double> energies = frr::column_energies(ex.E);
      const double g = gamma.value_or(frr::energy_gap_threshold(energies));
      const frr::Mask mask = frr::detect_outliers(ex.E, g);
      frr::write_mask(mask, run.path("outliers.txt"));
      run.note_output("outliers.txt");
      run.matrix(Eigen::Map<const frr::Vector>(energies.data(), static_cast<Eigen::Index>(energies.size())),
                 "energies", frr::MatrixFormat::Csv);
      const auto flagged = std::count(mask.begin(), mask.end(), true);
      run.manifest()["params"] = {{"extractor", extractor_dir}, {"gamma", g}, {"gamma_from_gap", !gamma}};
      run.manifest()["result"] = {{"flagged", flagged}};
      run.finish();
      std::cout << "gamma=" << g << " flagged=" << flagged << '\n';
      return 0;
    }

    if (*closed) {
      Run run("closed-form", out, args);
      const frr::Matrix X = frr::read_matrix(input);
      json result;
      if (cf_mode == "sim") {
        run.matrix(frr::sim_solution(X), "Z", fmt);
      } else if (cf_mode == "pca") {
        run.matrix(frr::pca_basis(X, cf_m), "P", fmt);
      } else {
        const frr::ClosedFormSolution s = cf_mode == "frr" ? frr::frr_closed_form(X, cf_m) : frr::tfrr_closed_form(X, cf_m);
        run.matrix(s.Z, "Z", fmt);
        run.matrix(s.L, "L", fmt);
        run.matrix(s.R, "R", fmt);
        result = {{"objective", s.objective}, {"rank_X", s.rank_X}};
        std::cout << "rank_X=" << s.rank_X << " objective=" << s.objective << '\n';
      }
      run.manifest()["params"] = {{"input", input}, {"m", cf_m}, {"mode", cf_mode}, {"format", format}};
      if (!result.is_null()) run.manifest()["result"] = result;
      run.finish();
      return 0;
    }

    if (*sweep) {
      Run run("sweep", out, args);
      std::ifstream f(sweep_spec);
      if (!f) throw frr::Error(frr::ErrorCode::IoError, "cannot open " + sweep_spec);
      json js;
      try {
        js = json::parse(f);
      } catch (const json::exception& e) {
        throw frr::Error(frr::ErrorCode::ParseError, e.what());
      }
      frr::SweepPlan plan;
      plan.k = js.value("k", plan.k);
      plan.d_h = js.value("d_h", plan.d_h);
      plan.d_l = js.value("d_l", plan.d_l);
      plan.p_values = js.value("p", plan.p_values);
      plan.m = js.value("m", 0L);
      if (js.contains("seeds") && js["seeds"].is_array()) {
        plan.seeds = js["seeds"].get<std::vector<std::uint64_t>>();
      } else {
        const auto count = js.value("seeds", 20);
        const auto first = js.value("first_seed", std::uint64_t{0});
        for (int i = 0; i < count; ++i) plan.seeds.push_back(first + static_cast<std::uint64_t>(i));
      }
      plan.solver = js.value("solver", std::string("closed")) == "adm" ? frr::SolverKind::Adm : frr::SolverKind::ClosedForm;
      plan.config.mu = js.value("mu", plan.config.mu);
      plan.config.beta0 = js.value("beta0", plan.config.beta0);
      plan.config.beta_max = js.value("beta_max", plan.config.beta_max);
      plan.config.rho = js.value("rho", plan.config.rho);
      plan.config.max_iter = js.value("max_iter", plan.config.max_iter);

      const auto cells = frr::run_sweep(plan);
      std::ofstream csv(run.path("sweep.csv"));
      if (!csv) throw frr::Error(frr::ErrorCode::IoError, "cannot write sweep.csv");
      csv.precision(17);
      csv << "p,seed,accuracy_Z,accuracy_LR\n";
      for (const auto& c : cells) csv << c.p << ',' << c.seed << ',' << c.accuracy_z << ',' << c.accuracy_lr << '\n';
      run.note_output("sweep.csv");
      run.manifest()["params"] = js;
      run.finish();
      std::cout << "cells=" << cells.size() << '\n';
      return 0;
    }
  } catch (const frr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case frr::ErrorCode::IoError:
      case frr::ErrorCode::BadMagic:
      case frr::ErrorCode::BadVersion:
      case frr::ErrorCode::TruncatedFile:
      case frr::ErrorCode::ParseError:
        return kExitIo;
      default:
        return kExitUsage;
    }
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
