#include <gtest/gtest.h>

#include <sstream>

#include "pecert/pecert.hpp"
#include "support.hpp"

using namespace pecert;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  EXPECT_EQ(parse_config("{}"), ExperimentConfig{});
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.activation = "step";
  c.c = Vector{1.0, 2.0, 3.0, 4.0};
  c.input = mrac::ReferenceInput::custom(1.5, {{2.0, 0.25}, {-1.0, 3.0}});
  c.pe.time_sep_tol = 1e-4;
  c.sim.x0 = {0.1, -0.2};
  EXPECT_EQ(parse_config(to_json(c).dump(2)), c);
  EXPECT_EQ(parse_config(to_json(ExperimentConfig{}).dump()), ExperimentConfig{});
}

TEST(Config, DiagonalShorthandAndPartialSections) {
  const auto c = parse_config(R"({"gamma": [1, 2, 3, 4], "sim": {"t_final": 10}})");
  EXPECT_EQ(c.gamma, Matrix::diagonal(std::vector<double>{1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(c.sim.t_final, 10.0);
  EXPECT_DOUBLE_EQ(c.sim.ts, 1e-3);
}

TEST(Config, ThetaHatDefaultsFollowUnitCount) {
  const auto c = parse_config(R"({"network": {"W": [[1, 0], [0, 1]], "b": [1, 1]},
    "theta": [1, 2], "gamma": [1, 1]})");
  EXPECT_EQ(c.sim.theta_hat0, (Vector{0.0, 0.0}));
}

TEST(Config, ErrorsNameLineAndPath) {
  EXPECT_EQ(error_of("{\n  \"plant\": {\n    \"a1\": \"two\"\n  }\n}"), "cfg.json:3: plant.a1: expected a number");
  EXPECT_NE(error_of("{\n  \"plant\": {\n    \"a1\": -1\n  }\n}").find("cfg.json:2: plant:"), std::string::npos);
  const auto dup = error_of("{\n\n  \"network\": {\"W\": [[1, 2], [2, 4], [1, 0], [0, 1]], \"b\": [1, 2, 0, 0]}\n}");
  EXPECT_NE(dup.find("cfg.json:3: network:"), std::string::npos) << dup;
  EXPECT_NE(dup.find("duplicate hyperplane"), std::string::npos) << dup;
  EXPECT_NE(error_of("{\n\"theta\": [1, 2]\n}").find("cfg.json:2: theta: expected 4 entries"), std::string::npos);
  EXPECT_NE(error_of("{\"gamma\": [[1, 2], [3, 4]]}").find("gamma"), std::string::npos);
  EXPECT_NE(error_of("{\"qx\": [1, -1]}").find("qx: must be symmetric positive definite"), std::string::npos);
  EXPECT_NE(error_of("{\n\n\"sim\": [1,").find("cfg.json:3: invalid JSON"), std::string::npos);
  EXPECT_NE(error_of("[]").find("top level must be an object"), std::string::npos);
  EXPECT_NE(error_of(R"({"pe": {"scan_end": 50}})").find("pe.scan_end"), std::string::npos);
  EXPECT_NE(error_of(R"({"input": {"kind": "r3"}})").find("input.kind"), std::string::npos);
}

TEST(Config, ActivationScaleRules) {
  EXPECT_NE(error_of(R"({"activation": {"kind": "step"}})").find("required for step"), std::string::npos);
  EXPECT_NE(error_of(R"({"activation": {"kind": "relu", "c": [1, 1, 1, 1]}})").find("not allowed for relu"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"activation": {"kind": "step", "c": [1, 0, 1, 1]}})").find("activation"), std::string::npos);
  EXPECT_NE(error_of(R"({"activation": {"kind": "step", "c": [1, 1]}})").find("activation"), std::string::npos);
  const auto ok = parse_config(R"({"activation": {"kind": "step", "c": [1, 1, 1, 1]}})");
  EXPECT_EQ(ok.activation_kind().tag(), ActivationTag::Step);
}

TEST(Config, LoadMissingFile) { EXPECT_THROW(load_config("/nonexistent/pecert.json"), ConfigError); }

TEST(Io, RegionsJsonIsOneBased) {
  const auto j = io::regions_to_json(enumerate_regions(oracle::default_arrangement()));
  EXPECT_EQ(j["count"], 11);
  bool found = false;
  for (const auto& r : j["regions"])
    if (r["sign_vector"] == "1001") {
      found = true;
      EXPECT_EQ(r["active_units"], nlohmann::json::array({1, 4}));
    }
  EXPECT_TRUE(found);
}

TEST(Io, CertificateJsonShape) {
  const auto traj = oracle::line_path({0.0, 0.0}, {0.0, 0.0}, 101, 0.1);
  const auto rep = certify(traj, oracle::default_arrangement(), ActivationKind::relu(), CertifyOptions{5.0, 5.0});
  const auto j = io::certificate_to_json(rep);
  EXPECT_EQ(j["theorem"], "relu");
  EXPECT_EQ(j["verdict"], "FAIL");
  ASSERT_EQ(j["per_window"].size(), 2u);
  EXPECT_EQ(j["per_window"][0]["uncrossed"], nlohmann::json::array({1, 2, 3, 4}));
  EXPECT_EQ(j["per_window"][0]["failing_regions"], nlohmann::json::array({"1111"}));
  EXPECT_EQ(j["per_window"][0]["cond3_rank_ok"], false);
}

TEST(Io, ScanCsv) {
  PeScanResult scan{20.0, 1.0, {{100.0, 0.5, 2.0}, {101.0, 0.25, 3.0}}, 0.25, 3.0};
  std::stringstream ss;
  io::write_scan_csv(ss, scan);
  EXPECT_EQ(ss.str(), "tau,lambda_min,lambda_max\n100,0.5,2\n101,0.25,3\n");
}

TEST(Csv, ShortestRoundTrip) {
  for (double v : {0.1, 1e-300, -2.5, 123456789.123, 1.0 / 3.0}) EXPECT_EQ(csv::parse(csv::format(v), 1), v);
  EXPECT_EQ(csv::format(200.0), "200");
}

TEST(Config, ShippedFiles) {
  EXPECT_EQ(load_config(PECERT_SOURCE_DIR "/configs/default.json"), ExperimentConfig{});
  EXPECT_EQ(load_config(PECERT_SOURCE_DIR "/configs/step.json"), oracle::step_config());
}
