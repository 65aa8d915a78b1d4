#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pecert/csv.hpp"
#include "pecert/error.hpp"
#include "pecert/geometry.hpp"
#include "pecert/linalg.hpp"

namespace pecert {

// Read-only view of uniformly sampled points; sample k sits at t0 + k*ts.
struct TrajectoryView {
  double ts = 0.0;
  double t0 = 0.0;
  std::size_t dim = 0;
  std::span<const double> data;  // row-major, size() * dim values

  std::size_t size() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> point(std::size_t k) const { return data.subspan(k * dim, dim); }
  double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * ts; }
  double t_end() const noexcept { return time(size() - 1); }
  double duration() const noexcept { return static_cast<double>(size() - 1) * ts; }

  TrajectoryView slice(std::size_t begin, std::size_t end) const {
    return TrajectoryView{ts, time(begin), dim, data.subspan(begin * dim, (end - begin) * dim)};
  }

  // Largest Euclidean norm over the samples (the compact-set bound).
  double max_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < size(); ++k) m = std::max(m, norm2(point(k)));
    return m;
  }
};

class Trajectory {
 public:
  Trajectory(double ts, double t0, std::size_t dim, std::vector<double> data)
      : ts_(ts), t0_(t0), dim_(dim), data_(std::move(data)) {
    if (!(ts_ > 0.0) || !std::isfinite(ts_)) throw DomainError("Trajectory: timestep must be positive");
    if (!std::isfinite(t0_)) throw DomainError("Trajectory: non-finite start time");
    if (dim_ == 0 || data_.size() % dim_ != 0) throw ShapeError("Trajectory: data is not a whole number of points");
    if (data_.size() / dim_ < 2) throw RangeError("Trajectory: at least two samples required");
    for (double v : data_)
      if (!std::isfinite(v)) throw DomainError("Trajectory: non-finite sample");
  }

  static Trajectory from_points(double ts, double t0, const std::vector<Vector>& points) {
    if (points.empty()) throw RangeError("Trajectory: at least two samples required");
    const std::size_t dim = points.front().size();
    std::vector<double> data;
    data.reserve(points.size() * dim);
    for (const auto& p : points) {
      if (p.size() != dim) throw ShapeError("Trajectory: ragged points");
      data.insert(data.end(), p.begin(), p.end());
    }
    return Trajectory(ts, t0, dim, std::move(data));
  }

  TrajectoryView view() const { return TrajectoryView{ts_, t0_, dim_, data_}; }
  operator TrajectoryView() const { return view(); }

  double ts() const noexcept { return ts_; }
  double t0() const noexcept { return t0_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size() / dim_; }
  std::span<const double> point(std::size_t k) const { return view().point(k); }
  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  double ts_;
  double t0_;
  std::size_t dim_;
  std::vector<double> data_;
};

// Samples covering [tau, tau + T], snapped outward to whole samples. Ends that
// overshoot the trajectory by at most half a sample are clamped.
inline TrajectoryView window(const TrajectoryView& traj, double tau, double T) {
  if (!(T >= 0.0) || !std::isfinite(tau) || !std::isfinite(T)) throw RangeError("window: invalid tau or T");
  const double last = static_cast<double>(traj.size() - 1);
  const double lo = (tau - traj.t0) / traj.ts;
  const double hi = (tau + T - traj.t0) / traj.ts;
  if (lo < -0.5 || hi > last + 0.5)
    throw RangeError("window [" + csv::format(tau) + ", " + csv::format(tau + T) + "] exceeds trajectory span [" +
                     csv::format(traj.t0) + ", " + csv::format(traj.t_end()) + "]");
  constexpr double snap = 1e-6;
  const auto begin = static_cast<std::size_t>(std::max(0.0, std::floor(lo + snap)));
  const auto end_incl = static_cast<std::size_t>(std::min(last, std::ceil(hi - snap)));
  if (end_incl <= begin) throw RangeError("window: fewer than two samples");
  return traj.slice(begin, end_incl + 1);
}

struct Visit {
  SignVector region;
  std::size_t begin = 0;  // sample range [begin, end) within the segmented view
  std::size_t end = 0;    // begin == end marks a region passed between two samples

  std::size_t samples() const noexcept { return end - begin; }
};

struct CrossingEvent {
  std::size_t sample_index = 0;  // first sample after the crossing
  std::vector<std::size_t> flipped;
  bool degenerate = false;
  std::vector<double> refined_times;  // one per flipped index, same order
};

struct Segmentation {
  std::vector<Visit> visits;
  std::vector<CrossingEvent> crossings;

  std::size_t region_count() const noexcept { return visits.size(); }
};

struct SegmentOptions {
  std::optional<double> time_sep_tol;  // defaults to ts / 10
};

// Splits a sampled path into the ordered regions it visits and the borders
// it crosses. When several units flip between two samples, the affine
// functionals are interpolated linearly to time each flip; well-separated
// flips become successive single crossings, otherwise one degenerate event.
inline Segmentation segment(const TrajectoryView& traj, const HyperplaneArrangement& arr,
                            const SegmentOptions& opt = {}) {
  arr.require_dim(traj.dim);
  const double sep = opt.time_sep_tol.value_or(traj.ts / 10.0);
  const std::size_t len = traj.size();

  Segmentation seg;
  Vector h_prev = arr.preactivations(traj.point(0));
  SignVector s_prev = classify(arr, traj.point(0));
  seg.visits.push_back(Visit{s_prev, 0, 0});

  for (std::size_t k = 1; k < len; ++k) {
    Vector h = arr.preactivations(traj.point(k));
    SignVector s = classify(arr, traj.point(k));
    if (s != s_prev) {
      const Transition tr = transition_kind(s_prev, s);
      const double t_prev = traj.time(k - 1);
      std::vector<double> times(tr.flipped.size());
      for (std::size_t j = 0; j < tr.flipped.size(); ++j) {
        const std::size_t i = tr.flipped[j];
        const double denom = h_prev[i] - h[i];
        const double frac = denom != 0.0 ? std::clamp(h_prev[i] / denom, 0.0, 1.0) : 0.5;
        times[j] = t_prev + frac * traj.ts;
      }

      seg.visits.back().end = k;
      if (tr.nondegenerate) {
        seg.crossings.push_back(CrossingEvent{k, tr.flipped, false, times});
        seg.visits.push_back(Visit{s, k, k});
      } else {
        std::vector<std::size_t> order(times.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
        bool separated = true;
        for (std::size_t j = 1; j < order.size(); ++j)
          if (times[order[j]] - times[order[j - 1]] <= sep) separated = false;

        if (separated) {
          SignVector cur = s_prev;
          for (std::size_t j = 0; j < order.size(); ++j) {
            const std::size_t i = tr.flipped[order[j]];
            cur = cur.flipped(i);
            seg.crossings.push_back(CrossingEvent{k, {i}, false, {times[order[j]]}});
            seg.visits.push_back(Visit{cur, k, k});
          }
        } else {
          seg.crossings.push_back(CrossingEvent{k, tr.flipped, true, times});
          seg.visits.push_back(Visit{s, k, k});
        }
      }
      s_prev = std::move(s);
    }
    h_prev = std::move(h);
  }
  seg.visits.back().end = len;
  return seg;
}

// CSV with header t,x1,...,xn; extra columns (e.g. from a simulation dump)
// are ignored. When expected_ts is given and the file's spacing matches it,
// that exact timestep is kept.
inline Trajectory read_trajectory_csv(std::istream& in, std::optional<double> expected_ts = std::nullopt) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("trajectory csv: empty input");
  const auto header = csv::split(line);
  std::optional<std::size_t> t_col;
  std::vector<std::size_t> x_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = csv::trim(header[c]);
    if (name == "t") t_col = c;
  }
  for (std::size_t d = 1;; ++d) {
    const std::string want = "x" + std::to_string(d);
    auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) { return csv::trim(h) == want; });
    if (it == header.end()) break;
    x_cols.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  if (!t_col || x_cols.empty()) throw DomainError("trajectory csv line 1: header must contain t,x1,...,xn");

  std::vector<double> times;
  std::vector<double> data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != header.size())
      throw DomainError("trajectory csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    times.push_back(csv::parse(cells[*t_col], line_no));
    for (std::size_t c : x_cols) data.push_back(csv::parse(cells[c], line_no));
  }
  if (times.size() < 2) throw RangeError("trajectory csv: at least two samples required");

  const double t0 = times.front();
  double ts = (times.back() - t0) / static_cast<double>(times.size() - 1);
  if (!(ts > 0.0)) throw DomainError("trajectory csv: time must increase");
  if (expected_ts && std::abs(*expected_ts - ts) <= 1e-9 * *expected_ts) ts = *expected_ts;
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs(times[k] - times[k - 1] - ts) > 1e-9 * ts)
      throw DomainError("trajectory csv line " + std::to_string(k + 2) + ": time spacing is not uniform");
  }
  return Trajectory(ts, t0, x_cols.size(), std::move(data));
}

inline void write_trajectory_csv(std::ostream& os, const TrajectoryView& traj) {
  os << 't';
  for (std::size_t d = 1; d <= traj.dim; ++d) os << ",x" << d;
  os << '\n';
  std::vector<double> row(traj.dim + 1);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    row[0] = traj.time(k);
    const auto p = traj.point(k);
    for (std::size_t j = 0; j < traj.dim; ++j) row[j + 1] = p[j];
    csv::write_row(os, row);
  }
}

}  // namespace pecert
