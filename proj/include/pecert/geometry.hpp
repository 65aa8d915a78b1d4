#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pecert/error.hpp"
#include "pecert/linalg.hpp"
#include "pecert/simplex.hpp"

namespace pecert {

// Two units whose augmented rows (w_i, b_i) are parallel within this
// relative tolerance describe the same hyperplane.
inline constexpr double kHyperplaneParallelTol = 1e-9;

// N affine functionals w_i^T x + b_i over R^n; W is n x N with column i = w_i.
class HyperplaneArrangement {
 public:
  HyperplaneArrangement(Matrix w, Vector b) : w_(std::move(w)), b_(std::move(b)) {
    if (w_.cols() != b_.size())
      throw ShapeError("HyperplaneArrangement: W has " + std::to_string(w_.cols()) +
                       " columns but b has " + std::to_string(b_.size()) + " entries");
    if (w_.rows() == 0 || w_.cols() == 0) throw ShapeError("HyperplaneArrangement: empty W");
    for (double v : b_)
      if (!std::isfinite(v)) throw DomainError("HyperplaneArrangement: non-finite offset");
    validate();
  }

  std::size_t dim() const noexcept { return w_.rows(); }
  std::size_t units() const noexcept { return w_.cols(); }
  const Matrix& weights() const noexcept { return w_; }
  const Vector& offsets() const noexcept { return b_; }

  Vector normal(std::size_t i) const { return w_.col(i); }

  double preactivation(std::size_t i, std::span<const double> x) const {
    double s = b_[i];
    for (std::size_t k = 0; k < dim(); ++k) s += w_(k, i) * x[k];
    return s;
  }

  // All N values w_i^T x + b_i.
  Vector preactivations(std::span<const double> x) const {
    require_dim(x.size());
    Vector out(units());
    for (std::size_t i = 0; i < units(); ++i) out[i] = preactivation(i, x);
    return out;
  }

  void require_dim(std::size_t n) const {
    if (n != dim())
      throw ShapeError("point of dimension " + std::to_string(n) + " does not match arrangement dimension " +
                       std::to_string(dim()));
  }

 private:
  void validate() const {
    const std::size_t n = dim();
    std::vector<Vector> aug(units(), Vector(n + 1));
    for (std::size_t i = 0; i < units(); ++i) {
      double wn = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        aug[i][k] = w_(k, i);
        wn += w_(k, i) * w_(k, i);
      }
      if (wn == 0.0) throw InvariantError("zero normal vector for unit " + std::to_string(i + 1));
      aug[i][n] = b_[i];
    }
    for (std::size_t i = 0; i < units(); ++i) {
      for (std::size_t j = i + 1; j < units(); ++j) {
        const double ni = dot(aug[i], aug[i]);
        const double nj = dot(aug[j], aug[j]);
        const double c = dot(aug[i], aug[j]);
        const double sin2 = std::max(0.0, 1.0 - c * c / (ni * nj));
        if (sin2 <= kHyperplaneParallelTol * kHyperplaneParallelTol)
          throw InvariantError("duplicate hyperplane: units " + std::to_string(i + 1) + " and " +
                               std::to_string(j + 1));
      }
    }
  }

  Matrix w_;
  Vector b_;
};

// Activation pattern of a region; bit i set <=> region lies in w_i^T x + b_i > 0.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(std::vector<bool> bits) : bits_(std::move(bits)) {}
  explicit SignVector(std::string_view s) {
    bits_.reserve(s.size());
    for (char ch : s) {
      if (ch != '0' && ch != '1') throw DomainError("SignVector: expected only '0'/'1'");
      bits_.push_back(ch == '1');
    }
  }
  static SignVector from_mask(std::uint64_t mask, std::size_t n) {
    std::vector<bool> bits(n);
    for (std::size_t i = 0; i < n; ++i) bits[i] = (mask >> i) & 1u;
    return SignVector(std::move(bits));
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<bool>& bits() const noexcept { return bits_; }

  // Zero-based unit indices, ascending.
  std::vector<std::size_t> active_set() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(i);
    return out;
  }

  SignVector flipped(std::size_t i) const {
    SignVector out = *this;
    out.bits_[i] = !out.bits_[i];
    return out;
  }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (bool b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const SignVector&, const SignVector&) = default;
  friend auto operator<=>(const SignVector& a, const SignVector& b) { return a.bits_ <=> b.bits_; }

 private:
  std::vector<bool> bits_;
};

inline SignVector classify(const HyperplaneArrangement& arr, std::span<const double> x, double boundary_tol = 0.0) {
  arr.require_dim(x.size());
  if (!(boundary_tol >= 0.0)) throw DomainError("classify: boundary_tol must be non-negative");
  std::vector<bool> bits(arr.units());
  for (std::size_t i = 0; i < arr.units(); ++i) {
    const double h = arr.preactivation(i, x);
    if (!std::isfinite(h)) throw DomainError("classify: non-finite point");
    bits[i] = h > boundary_tol;
  }
  return SignVector(std::move(bits));
}

struct RegionLpOptions {
  double box = 1e6;          // |x_j| bound keeping unbounded regions finite
  double slack_cap = 1.0;    // normalized slack beyond which the witness stops moving
  double l1_weight = 1e-7;   // pulls witnesses toward the origin among equally good points
  double min_slack = 1e-9;
};

// Interior point of the region labelled s, or nullopt if the strict
// system is infeasible. Maximizes the smallest slack measured as distance
// to each hyperplane (capped) with a small L1 pull toward the origin.
inline std::optional<Vector> region_feasible(const HyperplaneArrangement& arr, const SignVector& s,
                                             const RegionLpOptions& opt = {}) {
  const std::size_t n = arr.dim();
  const std::size_t big_n = arr.units();
  if (s.size() != big_n) throw ShapeError("region_feasible: sign vector length mismatch");

  // Variables: p (n), q (n), t+ , t- with x = p - q, t = t+ - t-.
  const std::size_t nv = 2 * n + 2;
  const std::size_t tp = 2 * n, tq = 2 * n + 1;
  const std::size_t rows = big_n + 1 + 2 * n;
  Matrix a(rows, nv);
  Vector rhs(rows, 0.0);
  for (std::size_t i = 0; i < big_n; ++i) {
    const Vector w = arr.normal(i);
    const double wn = norm2(w);
    const double sigma = s[i] ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      a(i, k) = -sigma * w[k] / wn;
      a(i, n + k) = sigma * w[k] / wn;
    }
    a(i, tp) = 1.0;
    a(i, tq) = -1.0;
    rhs[i] = sigma * arr.offsets()[i] / wn;
  }
  a(big_n, tp) = 1.0;
  a(big_n, tq) = -1.0;
  rhs[big_n] = opt.slack_cap;
  for (std::size_t k = 0; k < 2 * n; ++k) {
    a(big_n + 1 + k, k) = 1.0;
    rhs[big_n + 1 + k] = opt.box;
  }
  Vector obj(nv, -opt.l1_weight);
  obj[tp] = 1.0;
  obj[tq] = -1.0;

  const LpResult lp = solve_lp(a, rhs, obj);
  if (lp.status != LpStatus::Optimal) {
    if (lp.status == LpStatus::Unbounded) throw NumericalFailure("region_feasible: LP reported unbounded");
    return std::nullopt;
  }
  const double t = lp.x[tp] - lp.x[tq];
  if (t < opt.min_slack) return std::nullopt;

  Vector x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = lp.x[k] - lp.x[n + k];
  if (classify(arr, x) != s) return std::nullopt;
  return x;
}

struct RegionCatalog {
  std::vector<SignVector> feasible;
  std::vector<Vector> witness_points;

  std::size_t size() const noexcept { return feasible.size(); }
};

inline constexpr std::size_t kMaxEnumerationUnits = 24;

// Exhaustive sweep over all 2^N sign vectors.
inline RegionCatalog enumerate_regions(const HyperplaneArrangement& arr, const RegionLpOptions& opt = {}) {
  const std::size_t big_n = arr.units();
  if (big_n > kMaxEnumerationUnits)
    throw CapacityError("enumerate_regions: " + std::to_string(big_n) + " units exceeds the limit of " +
                        std::to_string(kMaxEnumerationUnits));
  RegionCatalog cat;
  const std::uint64_t count = std::uint64_t{1} << big_n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    SignVector s = SignVector::from_mask(mask, big_n);
    if (auto w = region_feasible(arr, s, opt)) {
      cat.feasible.push_back(std::move(s));
      cat.witness_points.push_back(std::move(*w));
    }
  }
  return cat;
}

struct Transition {
  std::vector<std::size_t> flipped;  // zero-based, ascending
  bool nondegenerate = false;        // exactly one flip
};

inline Transition transition_kind(const SignVector& from, const SignVector& to) {
  if (from.size() != to.size()) throw ShapeError("transition_kind: length mismatch");
  Transition t;
  for (std::size_t i = 0; i < from.size(); ++i)
    if (from[i] != to[i]) t.flipped.push_back(i);
  t.nondegenerate = t.flipped.size() == 1;
  return t;
}

}  // namespace pecert
