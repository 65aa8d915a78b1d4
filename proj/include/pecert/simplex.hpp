#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pecert/error.hpp"
#include "pecert/linalg.hpp"

namespace pecert {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
};

namespace detail {

// Dense tableau; the last column holds the right-hand side and the last row
// the reduced costs (entering a column with negative cost improves the max).
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return cells_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double& cost(std::size_t c) { return at(rows_, c); }
  double& value() { return at(rows_, cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> cells_;
};

// Bland's rule primal simplex over columns [0, allowed_cols).
inline LpStatus run_simplex(Tableau& t, std::vector<std::size_t>& basis, std::size_t allowed_cols,
                            std::size_t max_iter, double eps) {
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::size_t enter = allowed_cols;
    for (std::size_t c = 0; c < allowed_cols; ++c) {
      if (t.cost(c) < -eps) {
        enter = c;
        break;
      }
    }
    if (enter == allowed_cols) return LpStatus::Optimal;

    std::size_t leave = t.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= eps) continue;
      const double ratio = t.rhs(r) / a;
      if (ratio < best - eps || (ratio <= best + eps && leave < t.rows() && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave == t.rows()) return LpStatus::Unbounded;
    t.pivot(leave, enter);
    basis[leave] = enter;
  }
  throw NumericalFailure("simplex: iteration limit exceeded");
}

}  // namespace detail

// Maximizes objective^T x subject to A x <= rhs and x >= 0 with a
// phase-1 / phase-2 dense tableau simplex.
inline LpResult solve_lp(const Matrix& a, std::span<const double> rhs, std::span<const double> objective,
                         double eps = 1e-10) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (rhs.size() != m || objective.size() != n) throw ShapeError("solve_lp: dimension mismatch");

  std::vector<std::size_t> needs_artificial;
  for (std::size_t i = 0; i < m; ++i)
    if (rhs[i] < 0.0) needs_artificial.push_back(i);
  const std::size_t n_art = needs_artificial.size();
  const std::size_t real_cols = n + m;  // originals then slacks
  detail::Tableau t(m, real_cols + n_art);
  std::vector<std::size_t> basis(m);

  for (std::size_t i = 0; i < m; ++i) {
    const double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * a(i, j);
    t.at(i, n + i) = sign;
    t.rhs(i) = sign * rhs[i];
    basis[i] = n + i;
  }
  for (std::size_t k = 0; k < n_art; ++k) {
    const std::size_t row = needs_artificial[k];
    t.at(row, real_cols + k) = 1.0;
    basis[row] = real_cols + k;
  }

  const std::size_t max_iter = 50 * (m + n + n_art) + 1000;

  if (n_art > 0) {
    // Phase 1: maximize -sum(artificials).
    for (std::size_t k = 0; k < n_art; ++k) t.cost(real_cols + k) = 1.0;
    for (std::size_t row : needs_artificial)
      for (std::size_t c = 0; c <= t.cols(); ++c) t.at(m, c) -= t.at(row, c);
    detail::run_simplex(t, basis, t.cols(), max_iter, eps);
    double scale = 1.0;
    for (double r : rhs) scale = std::max(scale, std::abs(r));
    if (t.value() < -1e-9 * scale) return LpResult{LpStatus::Infeasible, {}, 0.0};

    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < real_cols) continue;
      for (std::size_t c = 0; c < real_cols; ++c) {
        if (std::abs(t.at(r, c)) > 1e-9) {
          t.pivot(r, c);
          basis[r] = c;
          break;
        }
      }
    }
  }

  // Phase 2 cost row.
  for (std::size_t c = 0; c <= t.cols(); ++c) t.cost(c) = 0.0;
  for (std::size_t j = 0; j < n; ++j) t.cost(j) = -objective[j];
  for (std::size_t r = 0; r < m; ++r) {
    const double f = t.cost(basis[r]);
    if (f == 0.0) continue;
    for (std::size_t c = 0; c <= t.cols(); ++c) t.at(m, c) -= f * t.at(r, c);
  }
  const LpStatus status = detail::run_simplex(t, basis, real_cols, max_iter, eps);
  if (status == LpStatus::Unbounded) return LpResult{LpStatus::Unbounded, {}, 0.0};

  LpResult out{LpStatus::Optimal, Vector(n, 0.0), 0.0};
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) out.x[basis[r]] = t.rhs(r);
  out.objective = dot(objective, out.x);
  return out;
}

}  // namespace pecert
