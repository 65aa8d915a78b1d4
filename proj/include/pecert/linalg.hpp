#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pecert/error.hpp"

namespace pecert {

using Vector = std::vector<double>;

// Dense row-major matrix sized for the small problems in this library
// (state dimension and unit count up to a few dozen).
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
    }
    require_finite();
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite();
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static Matrix column(std::span<const double> v) {
    return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }
  Vector col(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw ShapeError("Matrix product: inner dimensions " + std::to_string(a.cols_) +
                       " and " + std::to_string(b.rows_) + " differ");
    }
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("Matrix: shape mismatch");
  }
  void require_finite() const {
    if (!all_finite()) throw DomainError("Matrix: non-finite entry");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector operator*(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) throw ShapeError("matrix-vector product: length mismatch");
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
  return out;
}

inline Vector operator*(const Matrix& m, const Vector& v) {
  return m * std::span<const double>(v);
}

// Symmetric part (S + S^T) / 2.
inline Matrix symmetrized(const Matrix& s) {
  Matrix out = s;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j) {
      const double m = 0.5 * (s(i, j) + s(j, i));
      out(i, j) = m;
      out(j, i) = m;
    }
  return out;
}

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns, column k pairs with values[k]
};

namespace detail {

inline void require_symmetric(const Matrix& s, const char* who) {
  if (!s.square()) throw SymmetryError(std::string(who) + ": matrix is not square");
  if (!s.all_finite()) throw DomainError(std::string(who) + ": non-finite entry");
  const double tol = 1e-12 * (1.0 + s.frobenius_norm());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j)
      if (std::abs(s(i, j) - s(j, i)) > tol)
        throw SymmetryError(std::string(who) + ": matrix is not symmetric");
}

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline SymEig sym_eig(const Matrix& s) {
  detail::require_symmetric(s, "sym_eig");
  const std::size_t n = s.rows();
  Matrix a = symmetrized(s);
  Matrix v = Matrix::identity(n);
  const double stop = 1e-14 * a.frobenius_norm();

  for (int sweep = 0; sweep < 50 && detail::off_diagonal_norm(a) > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::hypot(1.0, t);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymEig out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline double lambda_min(const Matrix& s) { return sym_eig(s).values.front(); }

inline bool is_symmetric_pd(const Matrix& s) {
  try {
    return s.rows() > 0 && sym_eig(s).values.front() > 0.0;
  } catch (const Error&) {
    return false;
  }
}

// Gaussian elimination with partial pivoting; solves A X = rhs.
inline Matrix solve_linear(const Matrix& a, const Matrix& rhs) {
  if (!a.square()) throw ShapeError("solve_linear: matrix is not square");
  if (rhs.rows() != a.rows()) throw ShapeError("solve_linear: rhs row count mismatch");
  if (!a.all_finite() || !rhs.all_finite()) throw DomainError("solve_linear: non-finite entry");
  const std::size_t n = a.rows();
  const std::size_t k = rhs.cols();
  Matrix lu = a;
  Matrix x = rhs;

  double scale = 0.0;
  for (double e : a.data()) scale = std::max(scale, std::abs(e));
  const double tiny = 1e-13 * std::max(scale, 1e-300) * static_cast<double>(std::max<std::size_t>(n, 1));

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(lu(r, col)) > std::abs(lu(piv, col))) piv = r;
    if (std::abs(lu(piv, col)) <= tiny || scale == 0.0)
      throw SingularMatrixError("solve_linear: matrix is singular to working precision");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(piv, j));
      for (std::size_t j = 0; j < k; ++j) std::swap(x(col, j), x(piv, j));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = lu(r, col) / lu(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) lu(r, j) -= f * lu(col, j);
      for (std::size_t j = 0; j < k; ++j) x(r, j) -= f * x(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = x(col, j);
      for (std::size_t c = col + 1; c < n; ++c) s -= lu(col, c) * x(c, j);
      x(col, j) = s / lu(col, col);
    }
  }
  return x;
}

inline Matrix inverse(const Matrix& a) { return solve_linear(a, Matrix::identity(a.rows())); }

// Solves P A + A^T P = -Q for symmetric positive-definite P (A Hurwitz).
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  if (!a.square()) throw ShapeError("solve_lyapunov: A is not square");
  if (q.rows() != a.rows() || !q.square()) throw ShapeError("solve_lyapunov: Q shape mismatch");
  if (!is_symmetric_pd(q)) throw DomainError("solve_lyapunov: Q must be symmetric positive definite");
  const std::size_t n = a.rows();

  // Unknown P(i,k) sits at index i*n+k; row i*n+j encodes entry (i,j).
  Matrix kron(n * n, n * n);
  Matrix rhs(n * n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t r = i * n + j;
      rhs(r, 0) = -q(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        kron(r, i * n + k) += a(k, j);
        kron(r, k * n + j) += a(k, i);
      }
    }
  }
  Matrix sol;
  try {
    sol = solve_linear(kron, rhs);
  } catch (const SingularMatrixError&) {
    throw NoUniqueSolutionError(
        "solve_lyapunov: no unique solution (A has eigenvalues summing to zero)");
  }
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = sol(i * n + j, 0);
  p = symmetrized(p);
  if (sym_eig(p).values.front() <= 0.0)
    throw DomainError("solve_lyapunov: solution is not positive definite (A not Hurwitz)");
  return p;
}

// Singular values by one-sided Jacobi (Hestenes), descending.
inline Vector singular_values(const Matrix& m) {
  if (!m.all_finite()) throw DomainError("singular_values: non-finite entry");
  // Work on the orientation with fewer columns.
  Matrix u = m.cols() <= m.rows() ? m : m.transpose();
  const std::size_t rows = u.rows();
  const std::size_t cols = u.cols();
  constexpr double eps = 1e-15;

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sv(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += u(i, j) * u(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

inline constexpr double kDefaultRankTol = 1e-8;

// Number of singular values above tol times the largest one.
inline std::size_t rank_tol(const Matrix& m, double tol = kDefaultRankTol) {
  if (m.empty()) return 0;
  if (!(tol > 0.0)) throw DomainError("rank_tol: tolerance must be positive");
  const Vector sv = singular_values(m);
  if (sv.empty() || sv.front() == 0.0) return 0;
  const double cut = tol * sv.front();
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [cut](double s) { return s > cut; }));
}

}  // namespace pecert
