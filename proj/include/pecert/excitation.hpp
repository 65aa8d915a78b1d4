#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pecert/activation.hpp"
#include "pecert/error.hpp"
#include "pecert/geometry.hpp"
#include "pecert/linalg.hpp"
#include "pecert/trajectory.hpp"

namespace pecert {

// Trapezoidal approximation of the integral of phi(x_t) phi(x_t)^T over the view.
inline Matrix gramian(const TrajectoryView& traj, const HyperplaneArrangement& arr, const ActivationKind& kind) {
  arr.require_dim(traj.dim);
  kind.require_units(arr.units());
  if (traj.size() < 2) throw RangeError("gramian: at least two samples required");
  const std::size_t big_n = arr.units();
  Matrix g(big_n, big_n);
  Vector f(big_n);
  kind.visit([&](const auto& sigma) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
      phi_into(arr, sigma, traj.point(k), f);
      const double w = (k == 0 || k + 1 == traj.size()) ? 0.5 * traj.ts : traj.ts;
      for (std::size_t i = 0; i < big_n; ++i) {
        const double wi = w * f[i];
        if (wi == 0.0) continue;
        for (std::size_t j = i; j < big_n; ++j) g(i, j) += wi * f[j];
      }
    }
  });
  for (std::size_t i = 0; i < big_n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

struct ScanOptions {
  double T = 20.0;
  double stride = 1.0;
};

struct PeWindow {
  double tau = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

struct PeScanResult {
  double T = 0.0;
  double stride = 0.0;
  std::vector<PeWindow> windows;
  double alpha1 = 0.0;  // min over windows of lambda_min
  double alpha2 = 0.0;  // max over windows of lambda_max
};

namespace detail {

// Window start times t0, t0 + stride, ... whose window still fits the view
// (half-sample slack at the far end).
inline std::vector<double> window_starts(const TrajectoryView& traj, double T, double stride) {
  if (!(T > 0.0) || !(stride > 0.0)) throw DomainError("scan: T and stride must be positive");
  if (T > traj.duration() + 0.5 * traj.ts)
    throw RangeError("scan: window length " + csv::format(T) + " exceeds trajectory span " +
                     csv::format(traj.duration()));
  std::vector<double> taus;
  const double limit = traj.t_end() + 0.5 * traj.ts;
  for (std::size_t j = 0;; ++j) {
    const double tau = traj.t0 + static_cast<double>(j) * stride;
    if (tau + T > limit) break;
    taus.push_back(tau);
  }
  return taus;
}

}  // namespace detail

inline PeScanResult pe_scan(const TrajectoryView& traj, const HyperplaneArrangement& arr, const ActivationKind& kind,
                            const ScanOptions& opt) {
  PeScanResult res{opt.T, opt.stride, {}, 0.0, 0.0};
  for (double tau : detail::window_starts(traj, opt.T, opt.stride)) {
    const SymEig eig = sym_eig(gramian(window(traj, tau, opt.T), arr, kind));
    res.windows.push_back(PeWindow{tau, eig.values.front(), eig.values.back()});
  }
  res.alpha1 = res.windows.front().lambda_min;
  res.alpha2 = res.windows.front().lambda_max;
  for (const auto& w : res.windows) {
    res.alpha1 = std::min(res.alpha1, w.lambda_min);
    res.alpha2 = std::max(res.alpha2, w.lambda_max);
  }
  return res;
}

// How difference columns x_t - x_t' are drawn from a visit for the rank test:
// each sample is paired with the visit's first sample and a column is kept
// only if it raises the rank, until `columns` are kept (0 means n).
struct RankProbeConfig {
  std::size_t columns = 0;
  double rank_tol = kDefaultRankTol;
};

struct CertifyOptions {
  double T = 20.0;
  double stride = 1.0;
  RankProbeConfig rank_probe{};
  std::optional<double> time_sep_tol;
};

enum class Verdict { Pass, Fail };

inline std::string to_string(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }

struct WindowCertificate {
  double tau = 0.0;
  bool cond1_crossed_all = false;
  std::vector<std::size_t> uncrossed;  // zero-based unit indices
  bool cond2_nondegenerate_only = false;
  std::vector<CrossingEvent> degenerate_events;
  std::optional<bool> cond3_rank_ok;  // ReLU only
  std::vector<SignVector> failing_regions;
  std::size_t crossings = 0;
  std::size_t regions_visited = 0;

  bool pass() const { return cond1_crossed_all && cond2_nondegenerate_only && cond3_rank_ok.value_or(true); }
};

struct CertificateReport {
  ActivationTag theorem = ActivationTag::Relu;
  double T = 0.0;
  double stride = 0.0;
  Verdict verdict = Verdict::Fail;
  std::vector<WindowCertificate> per_window;
};

// Greedy difference matrix for one visit (n x kept columns, possibly 0 columns).
inline Matrix rank_probe_differences(const TrajectoryView& traj, const Visit& visit, const RankProbeConfig& cfg) {
  const std::size_t n = traj.dim;
  const std::size_t want = cfg.columns == 0 ? n : cfg.columns;
  std::vector<Vector> kept;
  std::size_t rank = 0;
  if (visit.samples() >= 2) {
    const auto anchor = traj.point(visit.begin);
    for (std::size_t k = visit.begin + 1; k < visit.end && kept.size() < want && rank < n; ++k) {
      const auto p = traj.point(k);
      Vector d(n);
      bool nonzero = false;
      for (std::size_t j = 0; j < n; ++j) {
        d[j] = p[j] - anchor[j];
        nonzero = nonzero || d[j] != 0.0;
      }
      if (!nonzero) continue;
      Matrix trial(n, kept.size() + 1);
      for (std::size_t c = 0; c < kept.size(); ++c)
        for (std::size_t j = 0; j < n; ++j) trial(j, c) = kept[c][j];
      for (std::size_t j = 0; j < n; ++j) trial(j, kept.size()) = d[j];
      const std::size_t r = rank_tol(trial, cfg.rank_tol);
      if (r > rank) {
        rank = r;
        kept.push_back(std::move(d));
      }
    }
  }
  Matrix out(n, kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c)
    for (std::size_t j = 0; j < n; ++j) out(j, c) = kept[c][j];
  return out;
}

// Checks the crossing conditions (and, for ReLU, the per-region rank
// condition) on every window shift.
inline CertificateReport certify(const TrajectoryView& traj, const HyperplaneArrangement& arr,
                                 const ActivationKind& kind, const CertifyOptions& opt) {
  arr.require_dim(traj.dim);
  kind.require_units(arr.units());
  CertificateReport rep{kind.tag(), opt.T, opt.stride, Verdict::Pass, {}};
  const std::size_t big_n = arr.units();

  for (double tau : detail::window_starts(traj, opt.T, opt.stride)) {
    const TrajectoryView win = window(traj, tau, opt.T);
    if (win.size() < 2) throw RangeError("certify: window shorter than two samples");
    const Segmentation seg = segment(win, arr, SegmentOptions{opt.time_sep_tol});

    WindowCertificate wc;
    wc.tau = tau;
    wc.crossings = seg.crossings.size();
    wc.regions_visited = seg.region_count();

    std::vector<bool> crossed(big_n, false);
    for (const auto& ev : seg.crossings) {
      for (std::size_t i : ev.flipped) crossed[i] = true;
      if (ev.degenerate) wc.degenerate_events.push_back(ev);
    }
    for (std::size_t i = 0; i < big_n; ++i)
      if (!crossed[i]) wc.uncrossed.push_back(i);
    wc.cond1_crossed_all = wc.uncrossed.empty();
    wc.cond2_nondegenerate_only = wc.degenerate_events.empty();

    if (kind.is_relu()) {
      bool ok = true;
      for (const auto& visit : seg.visits) {
        // Empty active sets and visits without two in-window samples carry
        // no rank information.
        if (visit.region.active_set().empty() || visit.samples() < 2) continue;
        const ActiveSubmatrices sub = active_submatrices(arr, kind, visit.region);
        const Matrix d = rank_probe_differences(win, visit, opt.rank_probe);
        const std::size_t lhs = rank_tol(sub.w_t, opt.rank_probe.rank_tol);
        const std::size_t rhs = d.cols() == 0 ? 0 : rank_tol(sub.w_t * d, opt.rank_probe.rank_tol);
        if (lhs != rhs) {
          ok = false;
          if (std::find(wc.failing_regions.begin(), wc.failing_regions.end(), visit.region) ==
              wc.failing_regions.end())
            wc.failing_regions.push_back(visit.region);
        }
      }
      wc.cond3_rank_ok = ok;
    }

    if (!wc.pass()) rep.verdict = Verdict::Fail;
    rep.per_window.push_back(std::move(wc));
  }
  return rep;
}

// Smallest window length from an ascending ladder whose certificate passes.
inline std::optional<double> smallest_passing_window(const TrajectoryView& traj, const HyperplaneArrangement& arr,
                                                     const ActivationKind& kind, std::vector<double> ladder,
                                                     CertifyOptions opt) {
  std::sort(ladder.begin(), ladder.end());
  for (double T : ladder) {
    if (T > traj.duration() + 0.5 * traj.ts) break;
    opt.T = T;
    if (certify(traj, arr, kind, opt).verdict == Verdict::Pass) return T;
  }
  return std::nullopt;
}

}  // namespace pecert
