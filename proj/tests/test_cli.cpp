#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run run(const std::string& args) {
  const std::string cmd = std::string(PECERT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Parses the trailing JSON object of a run's output.
nlohmann::json summary(const Run& r) { return nlohmann::json::parse(r.out.substr(r.out.find('{'))); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("pecert_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RegionsDefaultArrangement) {
  const auto r = run("regions");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = summary(r);
  EXPECT_EQ(j["count"], 11);
  EXPECT_EQ(j["regions"].size(), 11u);
}

TEST_F(Cli, RegionsSingleUnitToFile) {
  const auto cfg = write("one.json", R"({"network": {"W": [[1, 1]], "b": [0]}, "theta": [1], "gamma": [1]})");
  const auto r = run("regions --config " + cfg + " --out " + path("regions.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(summary(r)["count"], 2);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("regions.json")))["count"], 2);
}

TEST_F(Cli, DuplicateHyperplaneIsAConfigError) {
  const auto cfg = write("dup.json", R"({"network": {"W": [[1, 2], [2, 4], [1, 0], [0, 1]], "b": [1, 2, 0, 0]}})");
  const auto r = run("regions --config " + cfg);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("duplicate hyperplane"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("dup.json:1: network"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("simulate --input r7").code, 2);
  EXPECT_EQ(run("certify").code, 2);
  EXPECT_EQ(run("certify --from-sim --trajectory x.csv").code, 2);
  EXPECT_EQ(run("certify --trajectory " + path("missing.csv")).code, 2);
  EXPECT_EQ(run("regions --config " + path("missing.json")).code, 2);
}

TEST_F(Cli, SimulateWritesCsvAndSummary) {
  const auto r = run("simulate --input r2 --out " + path("sim.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = summary(r);
  EXPECT_NEAR(j["kx"][0].get<double>(), -2.6667, 1e-3);
  EXPECT_NEAR(j["kr"].get<double>(), 5.3333, 1e-3);
  EXPECT_NEAR(j["px"][1][1].get<double>(), 1.28125, 1e-12);
  EXPECT_LE(j["final_e_norm"].get<double>(), 0.05);
  EXPECT_GE(j["final_theta_err_norm"].get<double>(), 0.5);
  std::ifstream in(path("sim.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,x1,x2,xr1,xr2,u,e_norm,theta_err_norm,theta_hat_1", 0), 0u) << header;
}

TEST_F(Cli, SimulateEquilibrium) {
  const auto cfg = write("eq.json", R"({"sim": {"t_final": 5, "x0": [1, -1], "xr0": [1, -1],
    "theta_hat0": [-1.2, 2.7, 0.8, -3.2]}})");
  const auto r = run("simulate --config " + cfg);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(summary(r)["final_e_norm"].get<double>(), 0.0);
  EXPECT_EQ(summary(r)["final_theta_err_norm"].get<double>(), 0.0);
}

TEST_F(Cli, SimulateDivergenceExitCode) {
  const auto cfg = write("wild.json", R"({"gamma": [1e9, 1e9, 1e9, 1e9], "sim": {"t_final": 50}})");
  const auto r = run("simulate --config " + cfg);
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(Cli, CertifyScenarioVerdicts) {
  const auto pass = run("certify --from-sim --input r1 --out " + path("r1.json"));
  ASSERT_EQ(pass.code, 0) << pass.out;
  const auto s1 = summary(pass);
  EXPECT_EQ(s1["verdict"], "PASS");
  EXPECT_EQ(s1["windows"], 81);
  EXPECT_GT(s1["alpha1"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(path("r1.scan.csv")));

  const auto fail = run("certify --from-sim --input r2 --out " + path("r2.json"));
  ASSERT_EQ(fail.code, 1) << fail.out;
  const auto rep = nlohmann::json::parse(slurp(path("r2.json")));
  EXPECT_EQ(rep["verdict"], "FAIL");
  for (const auto& w : rep["per_window"]) EXPECT_FALSE(w["uncrossed"].empty());
}

TEST_F(Cli, CertifyConstantTrajectoryFails) {
  std::string csv = "t,x1,x2\n";
  for (int k = 0; k <= 2000; ++k) csv += std::to_string(k * 0.1) + ",0.5,0.5\n";
  const auto file = write("const.csv", csv);
  const auto r = run("certify --trajectory " + file + " --window-ladder 20,40");
  ASSERT_EQ(r.code, 1) << r.out;
  const auto j = summary(r);
  EXPECT_EQ(j["failing_windows"], j["windows"]);
  EXPECT_TRUE(j["t_star"].is_null());
}

TEST_F(Cli, CsvAndFromSimAreIdentical) {
  ASSERT_EQ(run("simulate --out " + path("sim.csv")).code, 0);
  const auto a = run("certify --trajectory " + path("sim.csv") + " --out " + path("a.json"));
  const auto b = run("certify --from-sim --out " + path("b.json"));
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("a.scan.csv")), slurp(path("b.scan.csv")));
}

TEST_F(Cli, StepConfigAndLadder) {
  const auto r = run("certify --config " PECERT_SOURCE_DIR "/configs/step.json --from-sim --window-ladder 5,10,20");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = summary(r);
  EXPECT_EQ(j["verdict"], "PASS");
  ASSERT_TRUE(j["t_star"].is_number());
  EXPECT_LE(j["t_star"].get<double>(), 20.0);
}
