#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "frr/matrix_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
  int exit_code;
  std::string stdout_text;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'')
      q += "'\\''";
    else
      q += c;
  }
  return q + "'";
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            (std::string("frr_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  Result run(const std::vector<std::string>& args) const {
    std::string cmd = quote(FRR_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    const fs::path captured = root_ / "stdout.txt";
    cmd += " > " + quote(captured.string()) + " 2> " + quote((root_ / "stderr.txt").string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(captured)};
  }

  std::string dir(const std::string& name) const { return (root_ / name).string(); }

  // Re-runs a manifest's argv into a fresh directory and checks every listed
  // output is byte-identical.
  void expect_replay_identical(const std::string& run_dir) const {
    const json m = json::parse(slurp(fs::path(run_dir) / "manifest.json"));
    std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
    argv.erase(argv.begin());
    const std::string replay = run_dir + "_replay";
    for (std::size_t i = 0; i + 1 < argv.size(); ++i)
      if (argv[i] == "--out") argv[i + 1] = replay;
    ASSERT_EQ(run(argv).exit_code, 0);
    const json outputs = m.at("outputs");
    ASSERT_FALSE(outputs.empty());
    for (const auto& o : outputs) {
      const std::string name = o.get<std::string>();
      EXPECT_EQ(slurp(fs::path(run_dir) / name), slurp(fs::path(replay) / name)) << name;
    }
  }

  fs::path root_;
};

double parse_key(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return std::stod(line.substr(key.size() + 1));
  ADD_FAILURE() << "missing " << key << " in: " << text;
  return -1.0;
}

TEST_F(CliTest, GenClusterEvalPipeline) {
  const std::string data = dir("data"), clus = dir("clus"), ev = dir("eval");
  ASSERT_EQ(run({"gen", "--k", "10", "--p", "10", "--dh", "100", "--dl", "50", "--seed", "7", "--out", data}).exit_code, 0);
  const frr::Matrix X = frr::read_matrix(fs::path(data) / "X.frrm");
  EXPECT_EQ(X.rows(), 100);
  EXPECT_EQ(X.cols(), 100);
  const json gm = json::parse(slurp(fs::path(data) / "manifest.json"));
  EXPECT_EQ(gm.at("result").at("rank").get<int>(), 100);
  EXPECT_EQ(gm.at("command"), "gen");
  EXPECT_TRUE(gm.contains("tool_version"));
  EXPECT_TRUE(gm.contains("wall_clock_seconds"));

  ASSERT_EQ(run({"cluster", "--input", data + "/X.frrm", "--k", "10", "--affinity", "lr", "--seed", "3", "--out", clus})
                .exit_code,
            0);
  const Result r = run({"eval", "--pred", clus + "/labels.txt", "--truth", data + "/truth.txt"});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_GE(parse_key(r.stdout_text, "accuracy"), 0.95);
  EXPECT_NEAR(parse_key(r.stdout_text, "accuracy") + parse_key(r.stdout_text, "error"), 1.0, 1e-15);
}

TEST_F(CliTest, EvalPerfectPrediction) {
  std::ofstream(root_ / "l.txt") << "0\n1\n1\n2\n";
  const Result r = run({"eval", "--pred", dir("l.txt"), "--truth", dir("l.txt")});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(parse_key(r.stdout_text, "accuracy"), 1.0);
  EXPECT_EQ(parse_key(r.stdout_text, "error"), 0.0);
}

TEST_F(CliTest, ManifestReplayIsBitExact) {
  const std::string data = dir("data");
  ASSERT_EQ(run({"gen", "--k", "3", "--p", "8", "--dh", "20", "--dl", "3", "--seed", "5", "--outliers", "2", "--shuffle",
                 "--out", data})
                .exit_code,
            0);
  expect_replay_identical(data);

  const std::string sol = dir("sol");
  ASSERT_EQ(run({"solve", "--input", data + "/X.frrm", "--m", "9", "--seed", "4", "--trace", "trace.csv", "--out", sol})
                .exit_code,
            0);
  EXPECT_EQ(slurp(fs::path(sol) / "trace.csv").rfind("iter,beta,objective,primal_residual,norm_residual\n", 0), 0u);
  expect_replay_identical(sol);

  const std::string clus = dir("clus");
  ASSERT_EQ(run({"cluster", "--solution", sol, "--k", "3", "--affinity", "z", "--seed", "1", "--out", clus}).exit_code, 0);
  expect_replay_identical(clus);

  const std::string clus_csv = dir("clus_csv");
  ASSERT_EQ(run({"cluster", "--input", data + "/X.frrm", "--k", "3", "--seed", "8", "--format", "csv", "--out", clus_csv})
                .exit_code,
            0);
  expect_replay_identical(clus_csv);
}

TEST_F(CliTest, GenOutliersWriteMaskAndLabels) {
  const std::string data = dir("data");
  ASSERT_EQ(run({"gen", "--k", "2", "--p", "5", "--dh", "10", "--dl", "2", "--outliers", "3", "--format", "csv", "--out",
                 data})
                .exit_code,
            0);
  EXPECT_EQ(frr::read_matrix(fs::path(data) / "X.csv").cols(), 13);
  EXPECT_EQ(frr::read_labels(fs::path(data) / "mask.txt"), (frr::Labels{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(frr::read_labels(fs::path(data) / "truth.txt").back(), 2);
}

TEST_F(CliTest, ClosedFormModes) {
  const std::string data = dir("data");
  ASSERT_EQ(run({"gen", "--k", "2", "--p", "6", "--dh", "10", "--dl", "2", "--out", data}).exit_code, 0);
  for (const char* mode : {"frr", "tfrr", "sim", "pca"}) {
    const std::string out = dir(std::string("cf_") + mode);
    ASSERT_EQ(run({"closed-form", "--input", data + "/X.frrm", "--m", "3", "--mode", mode, "--out", out}).exit_code, 0)
        << mode;
    EXPECT_TRUE(fs::exists(fs::path(out) / (std::string(mode) == "pca" ? "P.frrm" : "Z.frrm"))) << mode;
  }
  const json m = json::parse(slurp(fs::path(dir("cf_frr")) / "manifest.json"));
  EXPECT_NEAR(m.at("result").at("objective").get<double>(), 1.0, 1e-9);  // r_X - m = 4 - 3
  EXPECT_EQ(run({"closed-form", "--input", data + "/X.frrm", "--m", "9", "--out", dir("cf_bad")}).exit_code, 1);
}

TEST_F(CliTest, ExtractTransformDetect) {
  const std::string data = dir("data"), ex = dir("ex"), feat = dir("feat"), det = dir("det");
  ASSERT_EQ(run({"gen", "--k", "4", "--p", "15", "--dh", "40", "--dl", "4", "--seed", "2", "--outliers", "8", "--out",
                 data})
                .exit_code,
            0);
  ASSERT_EQ(run({"extract", "--train", data + "/X.frrm", "--strategy", "tfrr2", "--m", "16", "--mu", "0.003", "--out", ex})
                .exit_code,
            0);
  ASSERT_EQ(run({"transform", "--extractor", ex, "--input", data + "/X.frrm", "--out", feat}).exit_code, 0);
  const frr::Matrix F = frr::read_matrix(fs::path(feat) / "features.frrm");
  EXPECT_EQ(F.rows(), 16);
  EXPECT_EQ(F.cols(), 68);
  ASSERT_EQ(run({"detect", "--extractor", ex, "--out", det}).exit_code, 0);
  EXPECT_EQ(frr::read_labels(fs::path(det) / "outliers.txt"), frr::read_labels(fs::path(data) / "mask.txt"));
  EXPECT_EQ(frr::read_matrix(fs::path(det) / "energies.csv").rows(), 68);
}

TEST_F(CliTest, Sweep) {
  std::ofstream(root_ / "sweep.json") << R"({"k": 3, "d_h": 20, "d_l": 5, "p": [3, 6], "seeds": 2})";
  const std::string out = dir("sweep");
  ASSERT_EQ(run({"sweep", "--spec", dir("sweep.json"), "--out", out}).exit_code, 0);
  std::istringstream csv(slurp(fs::path(out) / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "p,seed,accuracy_Z,accuracy_LR");
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line.substr(0, line.find(',', line.find(',') + 1)));
  EXPECT_EQ(rows, (std::vector<std::string>{"3,0", "3,1", "6,0", "6,1"}));
  expect_replay_identical(out);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}).exit_code, 1);
  EXPECT_EQ(run({"frobnicate"}).exit_code, 1);
  EXPECT_EQ(run({"gen", "--k", "2"}).exit_code, 1);
  EXPECT_EQ(run({"gen", "--k", "0", "--p", "1", "--dh", "1", "--dl", "1", "--out", dir("g")}).exit_code, 1);
  EXPECT_EQ(run({"solve", "--input", dir("missing.frrm"), "--m", "1", "--out", dir("s")}).exit_code, 2);
  std::ofstream(root_ / "garbage.frrm") << "not a matrix at all";
  EXPECT_EQ(run({"solve", "--input", dir("garbage.frrm"), "--m", "1", "--out", dir("s")}).exit_code, 2);
  std::ofstream(root_ / "bad.txt") << "0\n-3\n";
  EXPECT_EQ(run({"eval", "--pred", dir("bad.txt"), "--truth", dir("bad.txt")}).exit_code, 2);
  std::ofstream(root_ / "a.txt") << "0\n1\n";
  std::ofstream(root_ / "b.txt") << "0\n";
  EXPECT_EQ(run({"eval", "--pred", dir("a.txt"), "--truth", dir("b.txt")}).exit_code, 1);
}

TEST_F(CliTest, StrictNonConvergence) {
  const std::string data = dir("data");
  ASSERT_EQ(run({"gen", "--k", "2", "--p", "6", "--dh", "10", "--dl", "2", "--out", data}).exit_code, 0);
  const std::vector<std::string> base{"solve", "--input", data + "/X.frrm", "--m", "2", "--max-iter", "2"};
  auto lax = base;
  lax.insert(lax.end(), {"--out", dir("lax")});
  EXPECT_EQ(run(lax).exit_code, 0);
  const json m = json::parse(slurp(fs::path(dir("lax")) / "manifest.json"));
  EXPECT_FALSE(m.at("result").at("converged").get<bool>());
  auto strict = base;
  strict.insert(strict.end(), {"--strict", "--out", dir("strict")});
  EXPECT_EQ(run(strict).exit_code, 3);
}

}  // namespace
