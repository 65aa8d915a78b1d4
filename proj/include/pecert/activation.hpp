#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pecert/error.hpp"
#include "pecert/geometry.hpp"
#include "pecert/linalg.hpp"

namespace pecert {

// A positive-semidefinite activation: zero for y <= 0, positive for y > 0.
// Unit-dependent so per-unit scales (scaled step) fit the same shape.
template <typename A>
concept Activation = requires(const A& a, std::size_t unit, double y) {
  { a(unit, y) } -> std::convertible_to<double>;
};

struct Relu {
  double operator()(std::size_t, double y) const noexcept { return y > 0.0 ? y : 0.0; }
  friend bool operator==(const Relu&, const Relu&) = default;
};

struct ScaledStep {
  explicit ScaledStep(Vector scales) : c(std::move(scales)) {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!(c[i] > 0.0) || !std::isfinite(c[i]))
        throw InvariantError("scaled step: scale c_" + std::to_string(i + 1) + " must be positive");
  }
  double operator()(std::size_t unit, double y) const { return y > 0.0 ? c[unit] : 0.0; }
  friend bool operator==(const ScaledStep&, const ScaledStep&) = default;

  Vector c;
};

static_assert(Activation<Relu>);
static_assert(Activation<ScaledStep>);

enum class ActivationTag { Step, Relu };

class ActivationKind {
 public:
  ActivationKind() : v_(Relu{}) {}
  ActivationKind(Relu r) : v_(r) {}
  ActivationKind(ScaledStep s) : v_(std::move(s)) {}

  static ActivationKind relu() { return ActivationKind(Relu{}); }
  static ActivationKind step(Vector c) { return ActivationKind(ScaledStep(std::move(c))); }

  ActivationTag tag() const noexcept {
    return std::holds_alternative<Relu>(v_) ? ActivationTag::Relu : ActivationTag::Step;
  }
  bool is_relu() const noexcept { return tag() == ActivationTag::Relu; }

  // Per-unit scales of a scaled step; nullopt for ReLU.
  std::optional<Vector> scales() const {
    if (const auto* s = std::get_if<ScaledStep>(&v_)) return s->c;
    return std::nullopt;
  }

  template <typename F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), v_);
  }

  void require_units(std::size_t n) const {
    if (const auto* s = std::get_if<ScaledStep>(&v_); s && s->c.size() != n)
      throw ShapeError("scaled step has " + std::to_string(s->c.size()) + " scales for " + std::to_string(n) +
                       " units");
  }

  friend bool operator==(const ActivationKind&, const ActivationKind&) = default;

 private:
  std::variant<Relu, ScaledStep> v_;
};

inline std::string to_string(ActivationTag t) { return t == ActivationTag::Relu ? "relu" : "step"; }

// phi(x)_i = sigma(w_i^T x + b_i).
template <Activation A>
void phi_into(const HyperplaneArrangement& arr, const A& sigma, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < arr.units(); ++i) out[i] = sigma(i, arr.preactivation(i, x));
}

template <Activation A>
Vector phi(const HyperplaneArrangement& arr, const A& sigma, std::span<const double> x) {
  arr.require_dim(x.size());
  Vector out(arr.units());
  phi_into(arr, sigma, x, out);
  return out;
}

inline Vector phi(const HyperplaneArrangement& arr, const ActivationKind& kind, std::span<const double> x) {
  kind.require_units(arr.units());
  return kind.visit([&](const auto& sigma) { return phi(arr, sigma, x); });
}

struct ActiveSubmatrices {
  Matrix w_t;                 // |S| x n, rows w_i^T for i in S ascending
  Vector b;                   // |S|
  std::optional<Vector> c;    // |S|, scaled step only
};

inline ActiveSubmatrices active_submatrices(const HyperplaneArrangement& arr, const ActivationKind& kind,
                                            const SignVector& s) {
  if (s.size() != arr.units()) throw ShapeError("active_submatrices: sign vector length mismatch");
  kind.require_units(arr.units());
  const auto active = s.active_set();
  const std::size_t n = arr.dim();
  ActiveSubmatrices out{Matrix(active.size(), n), Vector(active.size()), std::nullopt};
  const auto scales = kind.scales();
  if (scales) out.c = Vector(active.size());
  for (std::size_t r = 0; r < active.size(); ++r) {
    const std::size_t i = active[r];
    for (std::size_t k = 0; k < n; ++k) out.w_t(r, k) = arr.weights()(k, i);
    out.b[r] = arr.offsets()[i];
    if (scales) (*out.c)[r] = (*scales)[i];
  }
  return out;
}

}  // namespace pecert
