#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "frr/feature_extract.hpp"
#include "frr/synthgen.hpp"
#include "oracles.hpp"

namespace frr {
namespace {

SolverConfig outlier_config() {
  SolverConfig c;
  c.m = 16;
  c.mu = 0.003;
  c.beta0 = 1e-3;
  c.rho = 1.5;
  return c;
}

TEST(Fit, Tfrr2ReconstructsNoiselessData) {
  std::mt19937_64 rng(1);
  const Matrix X = oracle::random_rank(20, 30, 5, rng);
  SolverConfig c;
  c.m = 5;
  c.mu = 10.0;
  const Extractor ex = fit(X, c, Strategy::Tfrr2);
  EXPECT_EQ(ex.feature_dim(), 5);
  EXPECT_LE((ex.P.transpose() * ex.P - Matrix::Identity(5, 5)).norm(), 1e-10);
  EXPECT_LE((ex.P * ex.P.transpose() * X - X).norm(), 1e-3 * X.norm());
}

TEST(Fit, Tfrr1KeepsInputDimension) {
  std::mt19937_64 rng(2);
  const Matrix X = oracle::random_rank(12, 25, 4, rng);
  SolverConfig c;
  c.m = 4;
  const Extractor ex = fit(X, c, Strategy::Tfrr1);
  EXPECT_EQ(ex.input_dim(), 12);
  EXPECT_EQ(ex.feature_dim(), 12);
  EXPECT_EQ(transform(ex, X.col(0)).size(), 12);
}

TEST(Fit, Tfrr2RankBelowData) {
  std::mt19937_64 rng(3);
  const Matrix X = oracle::random_rank(15, 20, 5, rng);
  SolverConfig c;
  c.m = 2;
  EXPECT_EQ(fit(X, c, Strategy::Tfrr2).P.cols(), 2);
}

TEST(Fit, CenteringStoresMean) {
  std::mt19937_64 rng(4);
  const Matrix X = oracle::random_rank(10, 15, 3, rng);
  SolverConfig c;
  c.m = 3;
  const Extractor ex = fit(X, c, Strategy::Tfrr2, true);
  ASSERT_EQ(ex.mean.size(), 10);
  EXPECT_LE((ex.mean - X.rowwise().mean()).norm(), 1e-14);
}

TEST(Transform, Examples) {
  Extractor ex;
  ex.strategy = Strategy::Tfrr1;
  ex.P = 2.0 * Matrix::Identity(3, 3);
  const Vector x = Vector::LinSpaced(3, 1.0, 3.0);
  EXPECT_TRUE(transform(ex, x) == 2.0 * x);

  ex.strategy = Strategy::Tfrr2;
  ex.P = Matrix::Identity(3, 2);
  Vector expected(2);
  expected << 1.0, 2.0;
  EXPECT_TRUE(transform(ex, x) == expected);

  Matrix X(3, 2);
  X << 1, 4, 2, 5, 3, 6;
  const Matrix Y = transform_columns(ex, X);
  EXPECT_TRUE(Y == X.topRows(2));
  EXPECT_THROW(transform(ex, Vector::Ones(4)), Error);
}

TEST(DetectOutliers, Examples) {
  Matrix E = Matrix::Zero(2, 3);
  E(0, 1) = 3.0;
  E(1, 1) = 4.0;
  E(0, 2) = 0.5;
  EXPECT_EQ(detect_outliers(E, 1.0), (Mask{false, true, false}));
  EXPECT_EQ(detect_outliers(E, 5.0), (Mask{false, true, false}));
  EXPECT_EQ(detect_outliers(E, 0.0), (Mask{true, true, true}));
  EXPECT_EQ(detect_outliers(E, 5.0 + 1e-12), (Mask{false, false, false}));
  EXPECT_THROW(detect_outliers(E, -1.0), Error);
}

TEST(DetectOutliers, MonotoneInGamma) {
  std::mt19937_64 rng(5);
  const Matrix E = oracle::random_matrix(4, 50, rng);
  Mask prev = detect_outliers(E, 0.0);
  for (double g = 0.1; g < 6.0; g += 0.1) {
    const Mask cur = detect_outliers(E, g);
    for (std::size_t i = 0; i < cur.size(); ++i) EXPECT_TRUE(!cur[i] || prev[i]);
    prev = cur;
  }
}

TEST(EnergyGap, Midpoint) {
  EXPECT_EQ(energy_gap_threshold({1.0, 1.2, 9.0, 1.1, 8.0}), 4.6);
  EXPECT_TRUE(std::isinf(energy_gap_threshold({3.0})));
}

TEST(DetectOutliers, InjectedColumnsFlaggedAtGapMidpoint) {
  const SyntheticData d = generate({4, 15, 40, 4, 11});
  const double max_norm = d.X.colwise().norm().maxCoeff();
  const CorruptedData c = inject_outliers(d.X, 5, 10.0 * max_norm, 12);
  const Extractor ex = fit(c.X, outlier_config(), Strategy::Tfrr2);
  const double gamma = energy_gap_threshold(column_energies(ex.E));
  EXPECT_EQ(detect_outliers(ex.E, gamma), c.mask);
}

TEST(NnClassify, Examples) {
  Matrix gallery(1, 2);
  gallery << 0.0, 10.0;
  Matrix probes(1, 3);
  probes << 1.0, 9.0, 5.0;
  EXPECT_EQ(nn_classify(gallery, {7, 3}, probes), (Labels{7, 3, 7}));
  EXPECT_THROW(nn_classify(Matrix(1, 0), {}, probes), Error);
  EXPECT_THROW(nn_classify(gallery, {1}, probes), Error);
  EXPECT_THROW(nn_classify(gallery, {1, 2}, Matrix::Zero(2, 1)), Error);
}

TEST(NnClassify, SeparatedBlobs) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.1);
  const Matrix centers = 5.0 * oracle::random_matrix(8, 4, rng);
  auto sample = [&](int per_class, Matrix& X, Labels& y) {
    X.resize(8, 4 * per_class);
    y.clear();
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < per_class; ++i) {
        for (int r = 0; r < 8; ++r) X(r, c * per_class + i) = centers(r, c) + noise(rng);
        y.push_back(c);
      }
  };
  Matrix G, P;
  Labels gy, py;
  sample(10, G, gy);
  sample(50, P, py);
  const Labels pred = nn_classify(G, gy, P);
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == py[i];
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(pred.size()), 0.99);
}

TEST(Extractor, SaveLoadRoundTrip) {
  std::mt19937_64 rng(7);
  const Matrix X = oracle::random_rank(10, 12, 3, rng);
  SolverConfig c;
  c.m = 3;
  c.mu = 0.25;
  c.seed = 42;
  const Extractor ex = fit(X, c, Strategy::Tfrr2, true);
  const auto dir = std::filesystem::temp_directory_path() / "frr_extractor_roundtrip";
  std::filesystem::remove_all(dir);
  save_extractor(ex, dir);
  const Extractor back = load_extractor(dir);
  EXPECT_EQ(back.strategy, ex.strategy);
  EXPECT_TRUE(back.P == ex.P);
  EXPECT_TRUE(back.E == ex.E);
  EXPECT_TRUE(back.mean == ex.mean);
  EXPECT_EQ(back.config.m, 3);
  EXPECT_EQ(back.config.mu, 0.25);
  EXPECT_EQ(back.config.seed, 42u);
  EXPECT_TRUE(transform_columns(back, X) == transform_columns(ex, X));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_extractor(dir), Error);
}

TEST(Strategy, Parse) {
  EXPECT_EQ(parse_strategy("tfrr1"), Strategy::Tfrr1);
  EXPECT_EQ(parse_strategy("tfrr2"), Strategy::Tfrr2);
  EXPECT_THROW(parse_strategy("pca"), Error);
}

}  // namespace
}  // namespace frr
