#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pecert/activation.hpp"
#include "pecert/error.hpp"
#include "pecert/excitation.hpp"
#include "pecert/geometry.hpp"
#include "pecert/linalg.hpp"
#include "pecert/mrac.hpp"

namespace pecert {

struct PeConfig {
  double T = 20.0;
  double stride = 1.0;
  double scan_start = 100.0;
  double scan_end = 200.0;
  double rank_tol = kDefaultRankTol;
  std::optional<double> time_sep_tol;  // unset: ts / 10

  friend bool operator==(const PeConfig&, const PeConfig&) = default;
};

// Everything needed to rebuild the experiment; defaults reproduce the
// published second-order example.
struct ExperimentConfig {
  double a1 = 2.0, a2 = 0.5, beta = 0.75;
  double omega0 = 2.0, xi = 1.0;
  std::vector<Vector> w_columns{{2.0, 1.0}, {1.0, -2.0}, {1.5, -0.5}, {0.5, 2.0}};
  Vector b{1.0, 2.0, 2.5, 3.0};
  std::string activation = "relu";
  std::optional<Vector> c;
  Vector theta{-1.2, 2.7, 0.8, -3.2};
  Matrix gamma = Matrix::diagonal(std::vector<double>{5.0, 1.0, 5.0, 2.0});
  Matrix qx = Matrix::diagonal(std::vector<double>{1.0, 10.0});
  mrac::SimOptions sim{1e-3, 200.0, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}};
  mrac::ReferenceInput input = mrac::ReferenceInput::r1();
  PeConfig pe;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  HyperplaneArrangement arrangement() const {
    if (w_columns.empty()) throw ShapeError("network.W: no columns");
    const std::size_t n = w_columns.front().size();
    Matrix w(n, w_columns.size());
    for (std::size_t i = 0; i < w_columns.size(); ++i) {
      if (w_columns[i].size() != n) throw ShapeError("network.W: columns have different lengths");
      for (std::size_t k = 0; k < n; ++k) w(k, i) = w_columns[i][k];
    }
    return HyperplaneArrangement(std::move(w), b);
  }

  ActivationKind activation_kind() const {
    if (activation == "relu") {
      if (c) throw InvariantError("activation.c: not allowed for relu");
      return ActivationKind::relu();
    }
    if (activation == "step") {
      if (!c) throw InvariantError("activation.c: required for step");
      return ActivationKind::step(*c);
    }
    throw InvariantError("activation.kind: expected \"relu\" or \"step\"");
  }

  mrac::CanonicalPlant plant() const {
    return mrac::CanonicalPlant(a1, a2, beta, arrangement(), activation_kind(), theta);
  }
  mrac::ReferenceModel reference() const { return mrac::ReferenceModel(omega0, xi); }
  mrac::AdaptationConfig adaptation() const { return mrac::AdaptationConfig::make(gamma, qx, reference()); }

  CertifyOptions certify_options() const {
    return CertifyOptions{pe.T, pe.stride, RankProbeConfig{0, pe.rank_tol}, pe.time_sep_tol};
  }
};

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

// 1-based line of the JSON key path inside the document text, best effort.
inline std::size_t locate_line(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  std::size_t found = std::string::npos;
  for (const auto& key : path) {
    const auto p = text.find("\"" + key + "\"", pos);
    if (p == std::string::npos) break;
    found = p;
    pos = p + key.size() + 2;
  }
  if (found == std::string::npos) return 1;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(found), '\n'));
}

inline std::string join_path(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& p : path) s += (s.empty() ? "" : ".") + p;
  return s;
}

class ConfigReader {
 public:
  ConfigReader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(locate_line(text_, path)) + ": " + join_path(path) + ": " + msg);
  }

  // Runs fn, re-raising library errors with the key path and line attached.
  template <typename F>
  auto guard(const std::vector<std::string>& path, F&& fn) const -> decltype(fn()) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      fail(path, e.what());
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }

  double number(const nlohmann::json& j, const std::vector<std::string>& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  Vector vec(const nlohmann::json& j, const std::vector<std::string>& path) const {
    if (!j.is_array()) fail(path, "expected a list of numbers");
    Vector v;
    for (const auto& e : j) v.push_back(number(e, path));
    return v;
  }

  Matrix matrix(const nlohmann::json& j, const std::vector<std::string>& path, bool allow_diag) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty list");
    if (allow_diag && j.front().is_number()) return Matrix::diagonal(vec(j, path));
    std::vector<double> data;
    std::size_t cols = 0;
    for (const auto& row : j) {
      Vector r = vec(row, path);
      if (cols == 0) cols = r.size();
      if (r.size() != cols || cols == 0) fail(path, "rows must have equal, non-zero length");
      data.insert(data.end(), r.begin(), r.end());
    }
    return Matrix(j.size(), cols, std::move(data));
  }

  const std::string& text() const { return text_; }

 private:
  const std::string& text_;
  std::string source_;
};

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["plant"] = {{"a1", c.a1}, {"a2", c.a2}, {"beta", c.beta}};
  j["reference"] = {{"omega0", c.omega0}, {"xi", c.xi}};
  json cols = json::array();
  for (const auto& col : c.w_columns) cols.push_back(col);
  j["network"] = {{"W", cols}, {"b", c.b}};
  j["activation"] = {{"kind", c.activation}};
  if (c.c) j["activation"]["c"] = *c.c;
  j["theta"] = c.theta;
  j["gamma"] = detail::matrix_to_json(c.gamma);
  j["qx"] = detail::matrix_to_json(c.qx);
  j["sim"] = {{"ts", c.sim.ts},
              {"t_final", c.sim.t_final},
              {"x0", c.sim.x0},
              {"xr0", c.sim.xr0},
              {"theta_hat0", c.sim.theta_hat0}};
  json terms = json::array();
  for (const auto& [a, w] : c.input.terms) terms.push_back({a, w});
  j["input"] = {{"kind", mrac::to_string(c.input.kind)}, {"offset", c.input.offset}, {"terms", terms}};
  j["pe"] = {{"T", c.pe.T},
             {"stride", c.pe.stride},
             {"scan_start", c.pe.scan_start},
             {"scan_end", c.pe.scan_end},
             {"rank_tol", c.pe.rank_tol}};
  j["pe"]["time_sep_tol"] = c.pe.time_sep_tol ? json(*c.pe.time_sep_tol) : json(nullptr);
  return j;
}

// Parses and validates a config document. Missing sections keep their
// defaults; every error names the source line and key path.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "config") {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n'));
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  detail::ConfigReader rd(text, source);
  if (!j.is_object()) rd.fail({}, "top level must be an object");

  ExperimentConfig c;
  auto num = [&](const json& parent, const std::string& sect, const std::string& key, double& out) {
    if (parent.contains(key)) out = rd.number(parent.at(key), {sect, key});
  };

  if (j.contains("plant")) {
    const auto& p = j["plant"];
    num(p, "plant", "a1", c.a1);
    num(p, "plant", "a2", c.a2);
    num(p, "plant", "beta", c.beta);
  }
  if (j.contains("reference")) {
    const auto& r = j["reference"];
    num(r, "reference", "omega0", c.omega0);
    num(r, "reference", "xi", c.xi);
  }
  if (j.contains("network")) {
    const auto& nw = j["network"];
    if (nw.contains("W")) {
      if (!nw["W"].is_array() || nw["W"].empty()) rd.fail({"network", "W"}, "expected a list of columns");
      c.w_columns.clear();
      for (const auto& col : nw["W"]) c.w_columns.push_back(rd.vec(col, {"network", "W"}));
    }
    if (nw.contains("b")) c.b = rd.vec(nw["b"], {"network", "b"});
  }
  if (j.contains("activation")) {
    const auto& a = j["activation"];
    if (a.contains("kind")) {
      if (!a["kind"].is_string()) rd.fail({"activation", "kind"}, "expected a string");
      c.activation = a["kind"].get<std::string>();
    }
    c.c.reset();
    if (a.contains("c") && !a["c"].is_null()) c.c = rd.vec(a["c"], {"activation", "c"});
  }
  if (j.contains("theta")) c.theta = rd.vec(j["theta"], {"theta"});
  if (j.contains("gamma")) c.gamma = rd.matrix(j["gamma"], {"gamma"}, true);
  if (j.contains("qx")) c.qx = rd.matrix(j["qx"], {"qx"}, true);
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    num(s, "sim", "ts", c.sim.ts);
    num(s, "sim", "t_final", c.sim.t_final);
    if (s.contains("x0")) c.sim.x0 = rd.vec(s["x0"], {"sim", "x0"});
    if (s.contains("xr0")) c.sim.xr0 = rd.vec(s["xr0"], {"sim", "xr0"});
    if (s.contains("theta_hat0")) c.sim.theta_hat0 = rd.vec(s["theta_hat0"], {"sim", "theta_hat0"});
  }
  if (j.contains("input")) {
    const auto& in = j["input"];
    std::string kind = in.value("kind", std::string("r1"));
    if (kind == "r1") {
      c.input = mrac::ReferenceInput::r1();
    } else if (kind == "r2") {
      c.input = mrac::ReferenceInput::r2();
    } else if (kind == "custom") {
      c.input = mrac::ReferenceInput::custom(0.0, {});
    } else {
      rd.fail({"input", "kind"}, "expected \"r1\", \"r2\" or \"custom\"");
    }
    num(in, "input", "offset", c.input.offset);
    if (in.contains("terms")) {
      if (!in["terms"].is_array()) rd.fail({"input", "terms"}, "expected a list of [amplitude, omega] pairs");
      for (const auto& t : in["terms"]) {
        const Vector pair = rd.vec(t, {"input", "terms"});
        if (pair.size() != 2) rd.fail({"input", "terms"}, "each term must be [amplitude, omega]");
        c.input.terms.emplace_back(pair[0], pair[1]);
      }
    }
  }
  if (j.contains("pe")) {
    const auto& p = j["pe"];
    num(p, "pe", "T", c.pe.T);
    num(p, "pe", "stride", c.pe.stride);
    num(p, "pe", "scan_start", c.pe.scan_start);
    num(p, "pe", "scan_end", c.pe.scan_end);
    num(p, "pe", "rank_tol", c.pe.rank_tol);
    c.pe.time_sep_tol.reset();
    if (p.contains("time_sep_tol") && !p["time_sep_tol"].is_null()) {
      c.pe.time_sep_tol = rd.number(p["time_sep_tol"], {"pe", "time_sep_tol"});
    }
  }

  // Re-validate every module-level invariant.
  const auto arr = rd.guard({"network"}, [&] { return c.arrangement(); });
  if (!(j.contains("sim") && j["sim"].contains("theta_hat0"))) c.sim.theta_hat0 = Vector(arr.units(), 0.0);
  rd.guard({"activation"}, [&] {
    const auto k = c.activation_kind();
    k.require_units(arr.units());
    return 0;
  });
  if (c.theta.size() != arr.units()) rd.fail({"theta"}, "expected " + std::to_string(arr.units()) + " entries");
  if (arr.dim() != 2) rd.fail({"network", "W"}, "columns must have length 2 for the canonical plant");
  rd.guard({"plant"}, [&] { return c.plant(); });
  rd.guard({"reference"}, [&] { return c.reference(); });
  if (c.gamma.rows() != arr.units() || !c.gamma.square())
    rd.fail({"gamma"}, "expected a " + std::to_string(arr.units()) + "x" + std::to_string(arr.units()) + " matrix");
  if (!is_symmetric_pd(c.gamma)) rd.fail({"gamma"}, "must be symmetric positive definite");
  if (c.qx.rows() != 2 || !c.qx.square()) rd.fail({"qx"}, "expected a 2x2 matrix");
  if (!is_symmetric_pd(c.qx)) rd.fail({"qx"}, "must be symmetric positive definite");
  rd.guard({"qx"}, [&] { return c.adaptation(); });
  if (!(c.sim.ts > 0.0)) rd.fail({"sim", "ts"}, "must be positive");
  if (!(c.sim.t_final >= c.sim.ts)) rd.fail({"sim", "t_final"}, "must be at least ts");
  if (c.sim.x0.size() != 2) rd.fail({"sim", "x0"}, "expected 2 entries");
  if (c.sim.xr0.size() != 2) rd.fail({"sim", "xr0"}, "expected 2 entries");
  if (!c.sim.theta_hat0.empty() && c.sim.theta_hat0.size() != arr.units())
    rd.fail({"sim", "theta_hat0"}, "expected " + std::to_string(arr.units()) + " entries");
  if (!(c.pe.T > 0.0)) rd.fail({"pe", "T"}, "must be positive");
  if (!(c.pe.stride > 0.0)) rd.fail({"pe", "stride"}, "must be positive");
  if (!(c.pe.scan_end > c.pe.scan_start)) rd.fail({"pe", "scan_end"}, "must exceed scan_start");
  if (!(c.pe.rank_tol > 0.0)) rd.fail({"pe", "rank_tol"}, "must be positive");
  if (c.pe.time_sep_tol && !(*c.pe.time_sep_tol >= 0.0)) rd.fail({"pe", "time_sep_tol"}, "must be non-negative");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace pecert
