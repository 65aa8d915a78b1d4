// pecert: region listing, MRAC simulation and excitation certificates.
//
// Exit codes: 0 success / PASS, 1 certificate FAIL, 2 usage or config error,
// 3 numerical divergence.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pecert/pecert.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kDiverged = 3;

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::string input;
};

pecert::ExperimentConfig load(const CommonArgs& a) {
  pecert::ExperimentConfig cfg = a.config_path.empty() ? pecert::ExperimentConfig{} : pecert::load_config(a.config_path);
  if (a.input == "r1") cfg.input = pecert::mrac::ReferenceInput::r1();
  if (a.input == "r2") cfg.input = pecert::mrac::ReferenceInput::r2();
  return cfg;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw pecert::ConfigError(path + ": cannot open for writing");
  os.precision(17);
  return os;
}

int cmd_regions(const CommonArgs& a) {
  const auto cfg = load(a);
  const auto cat = pecert::enumerate_regions(cfg.arrangement());
  const auto j = pecert::io::regions_to_json(cat);
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    open_out(a.out) << j.dump(2) << '\n';
    std::cout << nlohmann::json{{"count", cat.size()}}.dump() << '\n';
  }
  return kOk;
}

pecert::mrac::SimResult run_sim(const pecert::ExperimentConfig& cfg) {
  const auto plant = cfg.plant();
  const auto ref = cfg.reference();
  return pecert::mrac::simulate(plant, ref, cfg.adaptation(), cfg.input, cfg.sim);
}

int cmd_simulate(const CommonArgs& a) {
  const auto cfg = load(a);
  const auto sim = run_sim(cfg);
  if (!a.out.empty()) {
    auto os = open_out(a.out);
    pecert::mrac::write_simulation_csv(os, sim);
  }
  const nlohmann::json summary = {{"kx", sim.gains.kx},
                                  {"kr", sim.gains.kr},
                                  {"px", pecert::io::matrix_json(cfg.adaptation().px)},
                                  {"final_e_norm", sim.e_norm.back()},
                                  {"final_theta_err_norm", sim.theta_err_norm.back()}};
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

struct CertifyArgs {
  std::string trajectory;
  bool from_sim = false;
  std::optional<double> window;
  std::optional<double> stride;
  std::optional<double> scan_start;
  std::optional<double> scan_end;
  std::string scan_out;
  std::vector<double> ladder;
};

int cmd_certify(const CommonArgs& a, const CertifyArgs& c) {
  auto cfg = load(a);
  if (c.window) cfg.pe.T = *c.window;
  if (c.stride) cfg.pe.stride = *c.stride;
  if (c.scan_start) cfg.pe.scan_start = *c.scan_start;
  if (c.scan_end) cfg.pe.scan_end = *c.scan_end;
  if (c.from_sim == !c.trajectory.empty()) throw CLI::ValidationError("certify", "give exactly one of --trajectory or --from-sim");

  std::optional<pecert::Trajectory> traj;
  if (c.from_sim) {
    traj.emplace(run_sim(cfg).traj_x);
  } else {
    std::ifstream in(c.trajectory);
    if (!in) throw pecert::ConfigError(c.trajectory + ": cannot open trajectory file");
    traj.emplace(pecert::read_trajectory_csv(in, cfg.sim.ts));
  }

  const auto arr = cfg.arrangement();
  const auto kind = cfg.activation_kind();
  const auto view = pecert::window(*traj, cfg.pe.scan_start, cfg.pe.scan_end - cfg.pe.scan_start);
  const auto opts = cfg.certify_options();
  const auto scan = pecert::pe_scan(view, arr, kind, pecert::ScanOptions{cfg.pe.T, cfg.pe.stride});
  const auto rep = pecert::certify(view, arr, kind, opts);

  auto report = pecert::io::certificate_to_json(rep);
  report["alpha1"] = scan.alpha1;
  report["alpha2"] = scan.alpha2;
  std::optional<double> t_star;
  if (!c.ladder.empty()) {
    t_star = pecert::smallest_passing_window(view, arr, kind, c.ladder, opts);
    report["t_star"] = t_star ? nlohmann::json(*t_star) : nlohmann::json(nullptr);
  }

  std::string scan_path = c.scan_out;
  if (scan_path.empty() && !a.out.empty()) {
    const auto dot = a.out.rfind('.');
    scan_path = (dot == std::string::npos ? a.out : a.out.substr(0, dot)) + ".scan.csv";
  }
  if (!a.out.empty()) open_out(a.out) << report.dump(2) << '\n';
  if (!scan_path.empty()) {
    auto os = open_out(scan_path);
    pecert::io::write_scan_csv(os, scan);
  }

  std::size_t failing = 0;
  for (const auto& w : rep.per_window) failing += w.pass() ? 0 : 1;
  nlohmann::json summary = {{"verdict", pecert::to_string(rep.verdict)},
                            {"alpha1", scan.alpha1},
                            {"alpha2", scan.alpha2},
                            {"windows", rep.per_window.size()},
                            {"failing_windows", failing}};
  if (!c.ladder.empty()) summary["t_star"] = t_star ? nlohmann::json(*t_star) : nlohmann::json(nullptr);
  std::cout << summary.dump(2) << '\n';
  return rep.verdict == pecert::Verdict::Pass ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistency-of-excitation certificates for step/ReLU regressors and the MRAC example"};
  app.require_subcommand(1);

  CommonArgs common;
  CertifyArgs cert;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Experiment config (JSON); built-in defaults if omitted");
    sub->add_option("--out", common.out, "Output path");
  };

  auto* regions = app.add_subcommand("regions", "List feasible activation regions of the arrangement");
  add_common(regions);

  auto* simulate = app.add_subcommand("simulate", "Run the closed-loop adaptive simulation");
  add_common(simulate);
  simulate->add_option("--input", common.input, "Reference input override")->check(CLI::IsMember({"r1", "r2"}));

  auto* certify = app.add_subcommand("certify", "Gramian scan and crossing certificate over window shifts");
  add_common(certify);
  certify->add_option("--input", common.input, "Reference input override (with --from-sim)")
      ->check(CLI::IsMember({"r1", "r2"}));
  certify->add_option("--trajectory", cert.trajectory, "Trajectory CSV (t,x1,...,xn)");
  certify->add_flag("--from-sim", cert.from_sim, "Simulate the config and certify its state trajectory");
  certify->add_option("--window", cert.window, "Window length T");
  certify->add_option("--stride", cert.stride, "Window shift increment");
  certify->add_option("--scan-start", cert.scan_start, "Start of the scanned time range");
  certify->add_option("--scan-end", cert.scan_end, "End of the scanned time range");
  certify->add_option("--scan-out", cert.scan_out, "Scan CSV path (default: <out stem>.scan.csv)");
  certify->add_option("--window-ladder", cert.ladder, "Window lengths to try; reports the smallest passing one")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*regions) return cmd_regions(common);
    if (*simulate) return cmd_simulate(common);
    if (*certify) return cmd_certify(common, cert);
  } catch (const pecert::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const pecert::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const pecert::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
