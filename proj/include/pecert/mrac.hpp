#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pecert/activation.hpp"
#include "pecert/csv.hpp"
#include "pecert/error.hpp"
#include "pecert/geometry.hpp"
#include "pecert/linalg.hpp"
#include "pecert/trajectory.hpp"

namespace pecert::mrac {

// Second-order plant in controllable canonical form,
//   x' = [[0, 1], [-a1, 2 a2]] x + [0, beta]^T (u + theta^T phi(x)).
struct CanonicalPlant {
  CanonicalPlant(double a1_, double a2_, double beta_, HyperplaneArrangement arr_, ActivationKind kind_, Vector theta_)
      : a1(a1_), a2(a2_), beta(beta_), arr(std::move(arr_)), kind(std::move(kind_)), theta(std::move(theta_)) {
    if (!(a1 > 0.0) || !(a2 > 0.0) || !(beta > 0.0))
      throw InvariantError("plant: a1, a2 and beta must be positive");
    if (arr.dim() != 2) throw ShapeError("plant: arrangement must live in R^2");
    if (theta.size() != arr.units()) throw ShapeError("plant: theta length must equal the unit count");
    kind.require_units(arr.units());
  }

  Matrix A() const { return Matrix{{0.0, 1.0}, {-a1, 2.0 * a2}}; }
  Matrix B() const { return Matrix{{0.0}, {beta}}; }
  Vector b_vec() const { return {0.0, beta}; }
  std::size_t units() const { return arr.units(); }

  double a1, a2, beta;
  HyperplaneArrangement arr;
  ActivationKind kind;
  Vector theta;
};

// Unity-gain damped oscillator x_r' = A_r x_r + B_r r.
struct ReferenceModel {
  ReferenceModel(double omega0_, double xi_) : omega0(omega0_), xi(xi_) {
    if (!(omega0 > 0.0) || !(xi > 0.0)) throw InvariantError("reference model: omega0 and xi must be positive");
  }

  Matrix Ar() const { return Matrix{{0.0, 1.0}, {-omega0 * omega0, -2.0 * xi * omega0}}; }
  Matrix Br() const { return Matrix{{0.0}, {omega0 * omega0}}; }
  Vector br_vec() const { return {0.0, omega0 * omega0}; }

  double omega0, xi;
};

struct AdaptationConfig {
  Matrix gamma;  // adaptation rates, N x N symmetric PD
  Matrix qx;     // n x n symmetric PD
  Matrix px;     // solves px Ar + Ar^T px = -qx
  double gamma_norm = 0.0;

  static AdaptationConfig make(Matrix gamma, Matrix qx, const ReferenceModel& ref) {
    if (!is_symmetric_pd(gamma)) throw InvariantError("adaptation: gamma must be symmetric positive definite");
    if (!is_symmetric_pd(qx)) throw InvariantError("adaptation: qx must be symmetric positive definite");
    Matrix px = solve_lyapunov(ref.Ar(), qx);
    const double gn = gamma.frobenius_norm();
    return AdaptationConfig{std::move(gamma), std::move(qx), std::move(px), gn};
  }
};

struct MatchingGains {
  Vector kx;  // feedback, length n
  double kr = 0.0;
};

inline MatchingGains matching_gains(const CanonicalPlant& plant, const ReferenceModel& ref) {
  if (std::abs(plant.beta) < 1e-12) throw SingularMatrixError("matching_gains: beta is zero");
  const double w2 = ref.omega0 * ref.omega0;
  return MatchingGains{{-(w2 - plant.a1) / plant.beta, -(2.0 * ref.xi * ref.omega0 + 2.0 * plant.a2) / plant.beta},
                       w2 / plant.beta};
}

// Frobenius residuals of A + B Kx^T - A_r and B Kr - B_r.
inline std::pair<double, double> matching_residuals(const CanonicalPlant& plant, const ReferenceModel& ref,
                                                    const MatchingGains& g) {
  const Matrix kx_row(1, 2, std::vector<double>(g.kx));
  const Matrix closed = plant.A() + plant.B() * kx_row;
  const double rx = (closed - ref.Ar()).frobenius_norm();
  const double rr = (plant.B() * g.kr - ref.Br()).frobenius_norm();
  return {rx, rr};
}

// c = 1/2 (A_r^{-1} B)^T Q_x (A_r^{-1} B).
inline double compute_c(const ReferenceModel& ref, const CanonicalPlant& plant, const Matrix& qx) {
  const Matrix z = solve_linear(ref.Ar(), plant.B());
  const double c = 0.5 * (z.transpose() * qx * z)(0, 0);
  if (!(c > 0.0)) throw DomainError("compute_c: c must be positive");
  return c;
}

struct ReferenceInput {
  enum class Kind { R1, R2, Custom };

  Kind kind = Kind::R1;
  double offset = 0.0;
  std::vector<std::pair<double, double>> terms;  // (amplitude, angular frequency)

  static ReferenceInput r1() { return {Kind::R1, 0.0, {}}; }
  static ReferenceInput r2() { return {Kind::R2, 0.0, {}}; }
  static ReferenceInput custom(double offset, std::vector<std::pair<double, double>> terms) {
    return {Kind::Custom, offset, std::move(terms)};
  }

  double operator()(double t) const {
    switch (kind) {
      case Kind::R1:
        return 10.0 * std::sin(0.5 * t);
      case Kind::R2:
        return 40.0 + 10.0 * std::sin(0.25 * t) + 10.0 * std::sin(0.5 * t);
      case Kind::Custom: {
        double r = offset;
        for (const auto& [amp, omega] : terms) r += amp * std::sin(omega * t);
        return r;
      }
    }
    return 0.0;
  }

  friend bool operator==(const ReferenceInput&, const ReferenceInput&) = default;
};

inline double reference_input(const ReferenceInput& input, double t) { return input(t); }

inline std::string to_string(ReferenceInput::Kind k) {
  switch (k) {
    case ReferenceInput::Kind::R1: return "r1";
    case ReferenceInput::Kind::R2: return "r2";
    case ReferenceInput::Kind::Custom: return "custom";
  }
  return "r1";
}

// Fixed-width rows of per-sample vectors, stored flat.
struct SampleSeries {
  std::size_t width = 0;
  std::vector<double> data;

  std::size_t size() const noexcept { return width == 0 ? 0 : data.size() / width; }
  std::span<const double> at(std::size_t k) const { return std::span<const double>(data).subspan(k * width, width); }
};

struct SimOptions {
  double ts = 1e-3;
  double t_final = 200.0;
  Vector x0{0.0, 0.0};
  Vector xr0{0.0, 0.0};
  Vector theta_hat0;  // empty means zeros

  friend bool operator==(const SimOptions&, const SimOptions&) = default;
};

struct SimResult {
  Trajectory traj_x;
  Trajectory traj_xr;
  SampleSeries theta_hat;
  SampleSeries phi;
  Vector e_norm;
  Vector theta_err_norm;
  Vector u;
  Vector r;
  MatchingGains gains;

  std::size_t size() const { return traj_x.size(); }
  double time(std::size_t k) const { return traj_x.view().time(k); }
};

// Forward-Euler closed loop. Under the matching conditions the plant driven
// by u = Kx^T x + Kr r - theta_hat^T phi is x' = A_r x + B_r r - B (theta_hat - theta)^T phi;
// the state is advanced in that form so the tracking equilibrium is exact.
inline SimResult simulate(const CanonicalPlant& plant, const ReferenceModel& ref, const AdaptationConfig& adapt,
                          const ReferenceInput& input, const SimOptions& opt) {
  const std::size_t n = 2;
  const std::size_t big_n = plant.units();
  if (!(opt.ts > 0.0)) throw DomainError("simulate: ts must be positive");
  if (!(opt.t_final >= opt.ts)) throw DomainError("simulate: t_final must be at least ts");
  if (opt.x0.size() != n || opt.xr0.size() != n) throw ShapeError("simulate: initial states must have length 2");
  if (adapt.gamma.rows() != big_n || !adapt.gamma.square()) throw ShapeError("simulate: gamma must be N x N");
  if (adapt.px.rows() != n || !adapt.px.square()) throw ShapeError("simulate: px must be 2 x 2");
  {
    const Matrix ar = ref.Ar();
    const double res = (adapt.px * ar + ar.transpose() * adapt.px + adapt.qx).frobenius_norm();
    if (res > 1e-9 * (1.0 + adapt.qx.frobenius_norm()))
      throw InvariantError("simulate: px does not solve the Lyapunov equation for this reference model");
  }
  Vector theta_hat = opt.theta_hat0.empty() ? Vector(big_n, 0.0) : opt.theta_hat0;
  if (theta_hat.size() != big_n) throw ShapeError("simulate: theta_hat0 length must equal the unit count");

  const MatchingGains gains = matching_gains(plant, ref);
  const Matrix ar = ref.Ar();
  const Vector br = ref.br_vec();
  const Vector bvec = plant.b_vec();
  const Vector px_b = adapt.px * bvec;
  const auto steps = static_cast<std::size_t>(std::llround(opt.t_final / opt.ts));

  std::vector<double> xs, xrs;
  xs.reserve((steps + 1) * n);
  xrs.reserve((steps + 1) * n);
  SampleSeries th_series{big_n, {}}, phi_series{big_n, {}};
  th_series.data.reserve((steps + 1) * big_n);
  phi_series.data.reserve((steps + 1) * big_n);
  Vector e_norm, th_err, us, rs;
  e_norm.reserve(steps + 1);
  th_err.reserve(steps + 1);
  us.reserve(steps + 1);
  rs.reserve(steps + 1);

  Vector x = opt.x0, xr = opt.xr0, f(big_n), theta_err(big_n), e(n);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * opt.ts;
    const double r = input(t);
    plant.kind.visit([&](const auto& sigma) { phi_into(plant.arr, sigma, x, f); });
    for (std::size_t i = 0; i < big_n; ++i) theta_err[i] = theta_hat[i] - plant.theta[i];
    for (std::size_t j = 0; j < n; ++j) e[j] = x[j] - xr[j];
    const double u = dot(gains.kx, x) + gains.kr * r - dot(theta_hat, f);

    xs.insert(xs.end(), x.begin(), x.end());
    xrs.insert(xrs.end(), xr.begin(), xr.end());
    th_series.data.insert(th_series.data.end(), theta_hat.begin(), theta_hat.end());
    phi_series.data.insert(phi_series.data.end(), f.begin(), f.end());
    e_norm.push_back(norm2(e));
    th_err.push_back(norm2(theta_err));
    us.push_back(u);
    rs.push_back(r);
    if (k == steps) break;

    const double mismatch = dot(theta_err, f);
    const double e_pb = dot(e, px_b);
    Vector x_next(n), xr_next(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = ar(i, 0) * x[0] + ar(i, 1) * x[1] + br[i] * r - bvec[i] * mismatch;
      const double dxr = ar(i, 0) * xr[0] + ar(i, 1) * xr[1] + br[i] * r;
      x_next[i] = x[i] + opt.ts * dx;
      xr_next[i] = xr[i] + opt.ts * dxr;
    }
    for (std::size_t i = 0; i < big_n; ++i) {
      double g = 0.0;
      for (std::size_t j = 0; j < big_n; ++j) g += adapt.gamma(i, j) * f[j];
      theta_hat[i] += opt.ts * g * e_pb;
    }
    x = std::move(x_next);
    xr = std::move(xr_next);
    bool finite = std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(xr[0]) && std::isfinite(xr[1]);
    for (double v : theta_hat) finite = finite && std::isfinite(v);
    if (!finite) throw DivergenceError("simulate: non-finite state", k + 1);
  }

  return SimResult{Trajectory(opt.ts, 0.0, n, std::move(xs)),
                   Trajectory(opt.ts, 0.0, n, std::move(xrs)),
                   std::move(th_series),
                   std::move(phi_series),
                   std::move(e_norm),
                   std::move(th_err),
                   std::move(us),
                   std::move(rs),
                   gains};
}

// Forward-Euler run of err' = -c Gamma phi phi^T err over a supplied phi series.
inline SampleSeries ltv_error_sim(const SampleSeries& phi_series, const Matrix& gamma, double c,
                                  std::span<const double> theta_err0, double ts) {
  const std::size_t big_n = phi_series.width;
  if (!(c > 0.0)) throw DomainError("ltv_error_sim: c must be positive");
  if (!(ts > 0.0)) throw DomainError("ltv_error_sim: ts must be positive");
  if (gamma.rows() != big_n || !gamma.square() || theta_err0.size() != big_n)
    throw ShapeError("ltv_error_sim: dimension mismatch");
  SampleSeries out{big_n, {}};
  out.data.reserve(phi_series.data.size());
  Vector err(theta_err0.begin(), theta_err0.end());
  out.data.insert(out.data.end(), err.begin(), err.end());
  for (std::size_t k = 0; k + 1 < phi_series.size(); ++k) {
    const auto f = phi_series.at(k);
    const double proj = dot(f, err);
    for (std::size_t i = 0; i < big_n; ++i) {
      double g = 0.0;
      for (std::size_t j = 0; j < big_n; ++j) g += gamma(i, j) * f[j];
      err[i] -= ts * c * g * proj;
    }
    for (double v : err)
      if (!std::isfinite(v)) throw DivergenceError("ltv_error_sim: non-finite error", k + 1);
    out.data.insert(out.data.end(), err.begin(), err.end());
  }
  return out;
}

// Lyapunov function e^T P e + err^T Gamma^{-1} err at every sample.
inline Vector lyapunov_series(const SimResult& sim, const CanonicalPlant& plant, const AdaptationConfig& adapt) {
  const Matrix gamma_inv = inverse(adapt.gamma);
  Vector v(sim.size());
  Vector err(plant.units()), e(2);
  for (std::size_t k = 0; k < sim.size(); ++k) {
    const auto x = sim.traj_x.point(k);
    const auto xr = sim.traj_xr.point(k);
    for (std::size_t j = 0; j < 2; ++j) e[j] = x[j] - xr[j];
    const auto th = sim.theta_hat.at(k);
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = th[i] - plant.theta[i];
    v[k] = dot(e, adapt.px * e) + dot(err, gamma_inv * err);
  }
  return v;
}

// t,x1,x2,xr1,xr2,u,e_norm,theta_err_norm,theta_hat_1..N,phi_1..N
inline void write_simulation_csv(std::ostream& os, const SimResult& sim) {
  const std::size_t big_n = sim.theta_hat.width;
  os << "t,x1,x2,xr1,xr2,u,e_norm,theta_err_norm";
  for (std::size_t i = 1; i <= big_n; ++i) os << ",theta_hat_" << i;
  for (std::size_t i = 1; i <= big_n; ++i) os << ",phi_" << i;
  os << '\n';
  std::vector<double> row;
  row.reserve(8 + 2 * big_n);
  for (std::size_t k = 0; k < sim.size(); ++k) {
    row.clear();
    row.push_back(sim.time(k));
    for (double v : sim.traj_x.point(k)) row.push_back(v);
    for (double v : sim.traj_xr.point(k)) row.push_back(v);
    row.push_back(sim.u[k]);
    row.push_back(sim.e_norm[k]);
    row.push_back(sim.theta_err_norm[k]);
    for (double v : sim.theta_hat.at(k)) row.push_back(v);
    for (double v : sim.phi.at(k)) row.push_back(v);
    csv::write_row(os, row);
  }
}

}  // namespace pecert::mrac
