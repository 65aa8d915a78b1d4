#pragma once

// Shared fixtures and test-only oracles. Oracles here re-derive quantities
// from first principles and must not call the library routine they check.

#include <cmath>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "pecert/pecert.hpp"

namespace pecert::oracle {

inline HyperplaneArrangement default_arrangement() { return ExperimentConfig{}.arrangement(); }

inline ExperimentConfig default_config(mrac::ReferenceInput input = mrac::ReferenceInput::r1()) {
  ExperimentConfig cfg;
  cfg.input = input;
  return cfg;
}

inline ExperimentConfig step_config(mrac::ReferenceInput input = mrac::ReferenceInput::r1()) {
  ExperimentConfig cfg = default_config(input);
  cfg.activation = "step";
  cfg.c = Vector{1.0, 1.0, 1.0, 1.0};
  return cfg;
}

// Cached closed-loop runs keyed by (scenario, ts, activation).
inline const mrac::SimResult& scenario_run(int scenario, double ts = 1e-3, bool step = false) {
  static std::map<std::tuple<int, double, bool>, mrac::SimResult> cache;
  const auto key = std::make_tuple(scenario, ts, step);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto input = scenario == 1 ? mrac::ReferenceInput::r1() : mrac::ReferenceInput::r2();
    ExperimentConfig cfg = step ? step_config(input) : default_config(input);
    cfg.sim.ts = ts;
    it = cache.emplace(key, mrac::simulate(cfg.plant(), cfg.reference(), cfg.adaptation(), cfg.input, cfg.sim)).first;
  }
  return it->second;
}

// ReLU features computed directly from W, b (no library activation code).
inline std::vector<double> relu_features(const ExperimentConfig& cfg, double x1, double x2) {
  std::vector<double> f;
  for (std::size_t i = 0; i < cfg.w_columns.size(); ++i) {
    const double h = cfg.w_columns[i][0] * x1 + cfg.w_columns[i][1] * x2 + cfg.b[i];
    f.push_back(h > 0.0 ? h : 0.0);
  }
  return f;
}

// Composite Simpson estimate of the ReLU Gramian over samples [begin, end]
// (inclusive) of a uniformly sampled 2-D path; falls back to a trapezoid on
// the final interval when the interval count is odd.
inline std::vector<std::vector<double>> simpson_gramian(const ExperimentConfig& cfg, const Trajectory& traj,
                                                        std::size_t begin, std::size_t end) {
  const std::size_t big_n = cfg.w_columns.size();
  std::vector<std::vector<double>> g(big_n, std::vector<double>(big_n, 0.0));
  const double h = traj.ts();
  const std::size_t intervals = end - begin;
  const std::size_t simpson_end = begin + (intervals / 2) * 2;
  auto add = [&](std::size_t k, double w) {
    const auto p = traj.point(k);
    const auto f = relu_features(cfg, p[0], p[1]);
    for (std::size_t i = 0; i < big_n; ++i)
      for (std::size_t j = 0; j < big_n; ++j) g[i][j] += w * f[i] * f[j];
  };
  for (std::size_t k = begin; k <= simpson_end; ++k) {
    double w = (k == begin || k == simpson_end) ? 1.0 : ((k - begin) % 2 == 1 ? 4.0 : 2.0);
    add(k, w * h / 3.0);
  }
  if (simpson_end < end) {
    add(simpson_end, 0.5 * h);
    add(end, 0.5 * h);
  }
  return g;
}

// Eigenvalues of symmetric A below lambda, by Sylvester inertia of the
// unpivoted LDL^T elimination of A - lambda I.
inline std::size_t negative_pivots(std::vector<std::vector<double>> a, double lambda) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) a[i][i] -= lambda;
  std::size_t neg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double piv = a[k][k];
    if (piv == 0.0) piv = 1e-300;
    if (piv < 0.0) ++neg;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / piv;
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return neg;
}

// Inertia-based bisection for the smallest eigenvalue of a symmetric matrix.
inline double oracle_lambda_min(const std::vector<std::vector<double>>& a) {
  double bound = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    bound = std::max(bound, s);
  }
  double lo = -bound - 1.0, hi = bound + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (negative_pivots(a, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline Matrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      m(i, j) = d(rng);
      m(j, i) = m(i, j);
    }
  return m;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

// Orthogonal matrix by Gram-Schmidt on a Gaussian draw.
inline Matrix random_rotation(std::mt19937_64& rng, std::size_t n) {
  Matrix m = random_matrix(rng, n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += m(i, j) * m(i, k);
      for (std::size_t i = 0; i < n; ++i) m(i, j) -= d * m(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += m(i, j) * m(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) m(i, j) /= nrm;
  }
  return m;
}

// Random smooth 2-D path (sum of a few sinusoids) around the default arrangement.
inline Trajectory random_path(std::mt19937_64& rng, std::size_t samples, double ts, double scale = 6.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double ax = scale * u(rng), ay = scale * u(rng), bx = scale * u(rng), by = scale * u(rng);
  const double cx = 2.0 * u(rng), cy = 2.0 * u(rng);
  const double w1 = 0.5 + std::abs(u(rng)), w2 = 1.0 + std::abs(u(rng));
  std::vector<Vector> pts;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * ts;
    pts.push_back({cx + ax * std::sin(w1 * t) + bx * std::cos(w2 * t), cy + ay * std::cos(w1 * t) + by * std::sin(w2 * t)});
  }
  return Trajectory::from_points(ts, 0.0, pts);
}

inline Trajectory line_path(Vector from, Vector to, std::size_t samples, double ts) {
  std::vector<Vector> pts;
  for (std::size_t k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(samples - 1);
    Vector p(from.size());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = from[j] + s * (to[j] - from[j]);
    pts.push_back(p);
  }
  return Trajectory::from_points(ts, 0.0, pts);
}

}  // namespace pecert::oracle
