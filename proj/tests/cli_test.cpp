#include "netsyn/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "netsyn/analysis.hpp"
#include "netsyn/decomp.hpp"
#include "netsyn/io.hpp"

namespace netsyn {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("netsyn_cli_" + std::string(::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, AnalyzeStableSubsystem) {
  NetworkedSystem sys = NetworkedSystem::zeros(Topology(1), {2}, {0}, {0}, {0});
  sys.A.dense() << -1, 1, 0, -2;
  save_system(sys, path("s.json"));
  const CliRun r = cli({"analyze", "--system", path("s.json")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("stable", 0), 0u);
  EXPECT_EQ(cli({"analyze", "--system", path("s.json"), "--decentralized"}).code, kExitOk);
}

TEST_F(CliTest, DecentralizedIndefiniteMatrix) {
  BlockMatrixd w({1, 1, 1}, {1, 1, 1});
  w.dense() << 2, 1, 0, 1, 2, 3, 0, 3, 1;
  write_json_file(block_matrix_to_json(w), path("w.json"));
  const CliRun r = cli({"analyze", "--matrix", path("w.json"), "--decentralized"});
  EXPECT_EQ(r.code, kExitInconclusive);
  EXPECT_NE(r.out.find("fails at subsystem 3"), std::string::npos) << r.out;
}

TEST_F(CliTest, GenerateSynthesizeTrace) {
  const std::vector<std::string> gen{"generate", "--target", "unstable", "--seed", "4",
                                     "--out",    path("u.json")};
  ASSERT_EQ(cli(gen).code, kExitOk);
  const std::string first = read_json_file(path("u.json")).dump();
  ASSERT_EQ(cli(gen).code, kExitOk);
  EXPECT_EQ(read_json_file(path("u.json")).dump(), first);

  EXPECT_EQ(cli({"analyze", "--system", path("u.json")}).code, kExitInconclusive);

  const CliRun s = cli({"synthesize", "--system", path("u.json"), "--mode", "stability", "--costs",
                     "distance", "--out", path("out")});
  ASSERT_EQ(s.code, kExitOk) << s.out << s.err;
  for (const char* f : {"result.json", "graph.dot", "report.json"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  const Json report = read_json_file(path("out/report.json"));
  EXPECT_TRUE(report.contains("J_dev"));
  EXPECT_TRUE(report.contains("J_nom"));
  const NetworkedSystem result = load_system(path("out/result.json"));
  EXPECT_TRUE(eigen_stability_oracle(result.A.dense()).hurwitz);

  ASSERT_EQ(cli({"trace", "--system", path("u.json"), "--out", path("t.json")}).code, kExitOk);
  EXPECT_EQ(replay_trace(read_json_file(path("t.json"))).size(), 5);
}

TEST_F(CliTest, CompareWritesReport) {
  ASSERT_EQ(cli({"generate", "--target", "unstable", "--seed", "2", "--out", path("u.json")})
                .code,
            kExitOk);
  const CliRun r = cli({"compare", "--system", path("u.json"), "--out", path("cmp")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "cmp" / "summary.csv"));
  const Json report = read_json_file(path("cmp/report.json"));
  EXPECT_EQ(report["rows"].size(), 6u);
  EXPECT_TRUE(fs::exists(dir_ / "cmp" / "dets_C_f.dot"));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({"analyze", "--nope"}).code, kExitError);
  EXPECT_EQ(cli({}).code, kExitError);
  EXPECT_EQ(cli({"synthesize", "--system", path("missing.json"), "--out", path("o")}).code,
            kExitError);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  NetworkedSystem sys = NetworkedSystem::zeros(Topology(1), {1}, {0}, {0}, {0});
  sys.A.dense() << 0.5;
  save_system(sys, path("bad.json"));
  const CliRun r = cli({"synthesize", "--system", path("bad.json"), "--out", path("o")});
  EXPECT_EQ(r.code, kExitInconclusive);
  EXPECT_EQ(cli({"synthesize", "--system", path("bad.json"), "--mode", "x", "--out", path("o")})
                .code,
            kExitError);
}

}  // namespace
}  // namespace netsyn
