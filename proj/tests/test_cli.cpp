#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "titlmars/bench.hpp"
#include "titlmars/model.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("titlmars_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + TITLMARS_CLI + "\" " + args + " > \"" +
                            (dir_ / "stdout.txt").string() + "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string out() const { return read(dir_ / "stdout.txt"); }
  std::string err() const { return read(dir_ / "stderr.txt"); }
  std::string path(const std::string& name) const { return "\"" + (dir_ / name).string() + "\""; }

  fs::path dir_;
};

TEST_F(Cli, SampleFitSolvePipeline) {
  ASSERT_EQ(run("sample --function f2 --grid 21 --out " + path("f2.csv")), 0) << err();
  ASSERT_EQ(run("fit --data " + path("f2.csv") + " --out " + path("f2.model")), 0) << err();
  const auto model = titlmars::load_model(dir_ / "f2.model");
  EXPECT_EQ(model.dimension(), 2u);
  ASSERT_EQ(run("solve --model " + path("f2.model") + " --sense max"), 0) << err();
  EXPECT_NE(out().find("optimal"), std::string::npos) << out();
  ASSERT_EQ(run("oracle --model " + path("f2.model") + " --sense min"), 0) << err();
  ASSERT_EQ(run("ga --model " + path("f2.model") + " --preset grefenstette --seed 3"), 0) << err();
  EXPECT_NE(out().find("heuristic"), std::string::npos) << out();
  ASSERT_EQ(run("miqp --model " + path("f2.model")), 0) << err();
  EXPECT_NE(out().find(">="), std::string::npos);
}

TEST_F(Cli, BadInputExitsTwo) {
  EXPECT_EQ(run("solve --model " + path("missing.model")), 2);
  EXPECT_EQ(run("solve"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("sample --function f9 --out " + path("x.csv")), 2);
  std::ofstream(dir_ / "bad.model") << "titl-mars v1\nvars one\n";
  EXPECT_EQ(run("solve --model " + path("bad.model")), 2);
  EXPECT_NE(err().find("line 2"), std::string::npos) << err();
}

TEST_F(Cli, CapacityAndIncompleteExitThree) {
  ASSERT_EQ(run("sample --function f1 --grid 21 --out " + path("f1.csv")), 0) << err();
  ASSERT_EQ(run("fit --data " + path("f1.csv") + " --out " + path("f1.model")), 0) << err();
  EXPECT_EQ(run("oracle --model " + path("f1.model") + " --vertex-cap 1"), 3);
  EXPECT_EQ(run("solve --model " + path("f1.model") + " --node-limit 1"), 3);
  EXPECT_NE(out().find("incomplete"), std::string::npos) << out();
}

TEST_F(Cli, WindfarmDataset) {
  ASSERT_EQ(run("windfarm --scenario fw2 --layouts 20 --out " + path("fw2.csv")), 0) << err();
  const auto text = read(dir_ / "fw2.csv");
  EXPECT_EQ(text.rfind("x1,x2,y", 0), 0u);
  EXPECT_EQ(run("windfarm --scenario fw9 --out " + path("x.csv")), 2);
  EXPECT_EQ(run("windfarm --turbines 5000 --out " + path("x.csv")), 2);
}

TEST_F(Cli, BenchWritesReportAndModels) {
  std::ofstream(dir_ / "spec.json") << R"({"sources": [{"name": "f2", "grid": 15}],
    "ga_presets": ["grefenstette"], "repetitions": 2})";
  ASSERT_EQ(run("bench --spec " + path("spec.json") + " --out-dir " + path("out") + " --no-timing --quiet"),
            0)
      << err();
  const auto rows = titlmars::parse_report_csv(read(dir_ / "out" / "report.csv"));
  EXPECT_EQ(rows.size(), 4u);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "models" / "f2.model"));
  ASSERT_EQ(run("bench --spec " + path("spec.json") + " --out-dir " + path("md") + " --format md --quiet"),
            0)
      << err();
  EXPECT_TRUE(fs::exists(dir_ / "md" / "report.md"));
}

TEST_F(Cli, DeterminismSpecShipsWithTests) {
  EXPECT_TRUE(fs::exists(fs::path(TITLMARS_TEST_DATA) / "determinism.json"));
}

}  // namespace
