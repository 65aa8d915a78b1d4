#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pecert/csv.hpp"
#include "pecert/excitation.hpp"
#include "pecert/geometry.hpp"
#include "pecert/mrac.hpp"

// Serialization of reports. Unit indices are written 1-based.
namespace pecert::io {

inline std::vector<std::size_t> one_based(const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out(idx);
  for (auto& i : out) ++i;
  return out;
}

inline nlohmann::json regions_to_json(const RegionCatalog& cat) {
  nlohmann::json regions = nlohmann::json::array();
  for (std::size_t k = 0; k < cat.size(); ++k) {
    regions.push_back({{"sign_vector", cat.feasible[k].to_string()},
                       {"active_units", one_based(cat.feasible[k].active_set())},
                       {"witness", cat.witness_points[k]}});
  }
  return {{"count", cat.size()}, {"regions", regions}};
}

inline nlohmann::json crossing_to_json(const CrossingEvent& ev) {
  return {{"sample_index", ev.sample_index},
          {"flipped", one_based(ev.flipped)},
          {"degenerate", ev.degenerate},
          {"refined_times", ev.refined_times}};
}

inline nlohmann::json certificate_to_json(const CertificateReport& rep) {
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : rep.per_window) {
    nlohmann::json deg = nlohmann::json::array();
    for (const auto& ev : w.degenerate_events) deg.push_back(crossing_to_json(ev));
    nlohmann::json failing = nlohmann::json::array();
    for (const auto& s : w.failing_regions) failing.push_back(s.to_string());
    nlohmann::json jw = {{"tau", w.tau},
                         {"verdict", to_string(w.pass() ? Verdict::Pass : Verdict::Fail)},
                         {"crossings", w.crossings},
                         {"regions_visited", w.regions_visited},
                         {"cond1_crossed_all", w.cond1_crossed_all},
                         {"uncrossed", one_based(w.uncrossed)},
                         {"cond2_nondegenerate_only", w.cond2_nondegenerate_only},
                         {"degenerate_events", deg}};
    if (w.cond3_rank_ok) {
      jw["cond3_rank_ok"] = *w.cond3_rank_ok;
      jw["failing_regions"] = failing;
    } else {
      jw["cond3_rank_ok"] = nullptr;
    }
    windows.push_back(std::move(jw));
  }
  return {{"theorem", to_string(rep.theorem)},
          {"T", rep.T},
          {"stride", rep.stride},
          {"verdict", to_string(rep.verdict)},
          {"per_window", windows}};
}

// tau,lambda_min,lambda_max
inline void write_scan_csv(std::ostream& os, const PeScanResult& scan) {
  os << "tau,lambda_min,lambda_max\n";
  for (const auto& w : scan.windows) csv::write_row(os, std::vector<double>{w.tau, w.lambda_min, w.lambda_max});
}

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

}  // namespace pecert::io
