#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "serkit/wav.hpp"

namespace fs = std::filesystem;

namespace {

// One scratch directory per test so ctest can run them in any order.
const fs::path& workdir() {
  static const fs::path dir = [] {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    auto d = fs::temp_directory_path() / "serkit_cli_tests" / info->name();
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SERKIT_CLI) + " " + args + " > " + (workdir() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST(Cli, BankReportsReferenceSizes) {
  ASSERT_EQ(run(std::string("bank --config ") + SERKIT_CONFIG_DIR + "/gabor.json"), 0);
  const auto log = slurp(workdir() / "last.log");
  EXPECT_NE(log.find("41"), std::string::npos);
  EXPECT_NE(log.find("455"), std::string::npos);
  EXPECT_NE(log.find("1020"), std::string::npos);
}

TEST(Cli, SynthTrainPredictMetrics) {
  ASSERT_EQ(run("synth --preset imbalanced10to1 --seed 3 --out " + path("train.csv")), 0);
  ASSERT_EQ(run("synth --preset imbalanced10to1 --seed 4 --out " + path("test.csv")), 0);
  ASSERT_EQ(run("select --method mrmr --k 6 --in " + path("train.csv") + " --out " + path("train_sel.csv") +
                " --indices " + path("idx.json")),
            0);
  ASSERT_EQ(run("select --apply --in " + path("test.csv") + " --out " + path("test_sel.csv") + " --indices " +
                path("idx.json")),
            0);
  ASSERT_EQ(run("train --scheme W1 --cfg " + std::string(SERKIT_CONFIG_DIR) + "/helm.json --seed 2 --in " +
                path("train_sel.csv") + " --model " + path("model.json")),
            0);
  ASSERT_EQ(run("predict --model " + path("model.json") + " --in " + path("test_sel.csv") + " --out " +
                path("pred.csv")),
            0);
  ASSERT_EQ(run("metrics --truth " + path("test.csv") + " --pred " + path("pred.csv") + " --out " +
                path("metrics.json")),
            0);
  const auto report = slurp(workdir() / "metrics.json");
  EXPECT_NE(report.find("\"gmean\""), std::string::npos);
  EXPECT_NE(report.find("\"confusion\""), std::string::npos);
}

TEST(Cli, ReduceWritesProjectionAndTrace) {
  ASSERT_EQ(run("synth --preset balanced --seed 1 --out " + path("bal.csv")), 0);
  std::ofstream(workdir() / "reduce.json") << R"({"T": 15})";
  ASSERT_EQ(run("reduce --dout 2 --seed 7 --config " + path("reduce.json") + " --in " + path("bal.csv") + " --out " +
                path("bal_red.csv") + " --matrix " + path("proj.json") + " --trace " + path("trace.csv")),
            0);
  EXPECT_EQ(slurp(workdir() / "trace.csv").rfind("iteration,best_cost,alpha,mt", 0), 0u);
  ASSERT_EQ(run("reduce --apply --in " + path("bal.csv") + " --out " + path("bal_red2.csv") + " --matrix " +
                path("proj.json")),
            0);
  EXPECT_EQ(slurp(workdir() / "bal_red.csv"), slurp(workdir() / "bal_red2.csv"));
}

TEST(Cli, LosoReportIsByteIdenticalAcrossRuns) {
  std::ofstream(workdir() / "run.json") << R"({
  "seed": 11,
  "data": {"synth": {"preset": "imbalanced10to1"}},
  "selection": {"method": "mrmr", "k": 6},
  "classifier": {"scheme": "proposed", "sparse_sizes": [20, 20], "proj_size": 80}
})";
  ASSERT_EQ(run("loso --config " + path("run.json") + " --out " + path("run_a")), 0);
  ASSERT_EQ(run("loso --config " + path("run.json") + " --out " + path("run_b")), 0);
  const auto a = slurp(workdir() / "run_a" / "report.json");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(workdir() / "run_b" / "report.json"));
  EXPECT_TRUE(fs::exists(workdir() / "run_a" / "seeds.json"));
  EXPECT_TRUE(fs::exists(workdir() / "run_a" / "config.json"));
  EXPECT_NE(a.find("\"fold_test_total\": 220"), std::string::npos);
}

TEST(Cli, ExtractThenFunctionalsFromWavManifest) {
  std::ofstream manifest(workdir() / "manifest.csv");
  manifest << "path,speaker,label\n";
  for (int u = 0; u < 4; ++u) {
    serkit::dsp::AudioClip clip;
    for (int i = 0; i < 8000; ++i)
      clip.samples.push_back(0.3 * std::sin(2.0 * 3.141592653589793 * (200.0 + 150.0 * u) * i / 16000.0));
    const std::string name = "u" + std::to_string(u) + ".wav";
    serkit::wav::write((workdir() / name).string(), clip);
    manifest << name << ",s" << u % 2 << ',' << (u < 2 ? "low" : "high") << '\n';
  }
  manifest.close();
  ASSERT_EQ(run("extract --manifest " + path("manifest.csv") + " --config " + SERKIT_CONFIG_DIR +
                "/gabor.json --features gbfb,mfcc --out " + path("frames.csv")),
            0);
  ASSERT_EQ(run("functionals --in " + path("frames.csv") + " --set mean,std,skew,kurt --out " + path("utt.csv")), 0);
  std::ifstream in(workdir() / "utt.csv");
  std::string header;
  std::getline(in, header);
  const auto columns = std::count(header.begin(), header.end(), ',') + 1;
  EXPECT_EQ(columns, 4 * (455 + 60) + 2);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Cli, ErrorsExitWithKind) {
  EXPECT_EQ(run("synth --preset nonsense --out " + path("x.csv")), 2);
  EXPECT_NE(slurp(workdir() / "last.log").find("BadConfig"), std::string::npos);
  EXPECT_EQ(run("predict --model " + path("missing.json") + " --in " + path("test.csv") + " --out " + path("p.csv")), 2);
}
