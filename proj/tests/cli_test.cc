#include "homopt/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "homopt/config.h"

namespace homopt {
namespace {

namespace fs = std::filesystem;

const std::string kConfigs = HOMOPT_CONFIG_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result RunCli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("homopt_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

nlohmann::json ReadJson(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(RunCli({"validate", kConfigs + "/ex4.json"}).code, 0);
  EXPECT_EQ(RunCli({"validate", kConfigs + "/ex3.json"}).code, 0);
  EXPECT_EQ(RunCli({"validate", kConfigs + "/ex2.json"}).code, 1);
  EXPECT_EQ(RunCli({"validate", "/nonexistent/config.json"}).code, 2);
  EXPECT_EQ(RunCli({"frobnicate"}).code, 2);

  const fs::path dir = TempDir("validate");
  auto j = ReadJson(kConfigs + "/ex4.json");
  j["system"]["k"] = 1;
  std::ofstream((dir / "k1.json").string()) << j.dump();
  EXPECT_EQ(RunCli({"validate", (dir / "k1.json").string()}).code, 1);

  j = ReadJson(kConfigs + "/ex4.json");
  j["system"]["typo"] = 1;
  std::ofstream((dir / "typo.json").string()) << j.dump();
  const Result r = RunCli({"validate", (dir / "typo.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("typo"), std::string::npos);

  j = ReadJson(kConfigs + "/ex4.json");
  j["system"]["f"][0] = "-x1 + x2^";
  std::ofstream((dir / "bad_expr.json").string()) << j.dump();
  EXPECT_EQ(RunCli({"validate", (dir / "bad_expr.json").string()}).code, 2);
}

TEST(Cli, SynthesizeReportIsDeterministic) {
  const fs::path dir = TempDir("synth");
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  ASSERT_EQ(RunCli({"--out", a, "synthesize", kConfigs + "/ex4.json"}).code, 0);
  ASSERT_EQ(RunCli({"synthesize", kConfigs + "/ex4.json", "--out", b}).code, 0);
  auto ja = ReadJson(a), jb = ReadJson(b);
  EXPECT_EQ(ja["result"]["kappa"], 11.0);
  EXPECT_NEAR(ja["result"]["constants"]["rho"].get<double>(), 2.18, 0.05);
  EXPECT_NE(ja["result"]["expressions"]["alpha_star"], "numeric");
  ja.erase("timestamp");
  jb.erase("timestamp");
  EXPECT_EQ(ja.dump(), jb.dump());
  EXPECT_EQ(ja["seed"], 42);
}

TEST(Cli, SynthesizeRejectsZeroTheta) {
  const Result r = RunCli({"synthesize", kConfigs + "/ex1.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("non-synthesizable: theta=0"), std::string::npos);
}

TEST(Cli, SimulateWritesCsv) {
  const fs::path dir = TempDir("sim");
  const Result r = RunCli({"--out", dir.string(), "simulate", kConfigs + "/ex1.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream csv(dir / "ex1_x0_w0.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,x1,u,w1,y1,V,running_J");
  const auto rep = ReadJson(dir / "ex1_report.json");
  EXPECT_EQ(rep["result"]["trajectories"].size(), 1u);
  EXPECT_GT(rep["result"]["trajectories"][0]["nodes"].get<int>(), 1000);
}

TEST(Cli, VerifyExample3FailsExample4Passes) {
  EXPECT_EQ(RunCli({"verify", kConfigs + "/ex3.json"}).code, 1);
  const Result r = RunCli({"--json", "verify", kConfigs + "/ex4.json"});
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Cli, SweepGain) {
  const Result r = RunCli({"--json", "sweep-gain", kConfigs + "/ex4.json", "--gains", "0.6,1,5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["result"]["gain_margin"].size(), 3u);
}

TEST(Cli, ReproduceExample1) {
  const Result r = RunCli({"reproduce", "ex1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("criterion 01 PASS"), std::string::npos);
  EXPECT_NE(r.out.find("int_y2(T=1000)"), std::string::npos);
  EXPECT_EQ(RunCli({"reproduce", "ex9"}).code, 2);
}

TEST(Config, AtomicWriteReplaces) {
  const fs::path dir = TempDir("atomic");
  const std::string p = (dir / "f.txt").string();
  WriteFileAtomic(p, "one");
  WriteFileAtomic(p, "two");
  std::ifstream in(p);
  std::string s;
  in >> s;
  EXPECT_EQ(s, "two");
  size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
}

TEST(Config, RoundTripEcho) {
  const ProjectConfig c = LoadConfig(kConfigs + "/ex4.json");
  const ProjectConfig d = ParseConfig(c.raw);
  EXPECT_EQ(d.raw, c.raw);
  EXPECT_EQ(d.kappa, 11.0);
  EXPECT_EQ(d.budget, 16384);
  EXPECT_EQ(d.disturbances.size(), 3u);
}

}  // namespace
}  // namespace homopt
