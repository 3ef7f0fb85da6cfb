#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "dynpca/error.hpp"

namespace dynpca {

template <std::size_t D>
using Vec = std::array<double, D>;

/// Row-major dense D x D matrix.
template <std::size_t D>
using Matrix = std::array<Vec<D>, D>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <std::size_t D>
constexpr Vec<D> add(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r{};
  for (std::size_t i = 0; i < D; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t D>
constexpr Vec<D> sub(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r{};
  for (std::size_t i = 0; i < D; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t D>
constexpr Vec<D> scale(const Vec<D>& a, double s) {
  Vec<D> r{};
  for (std::size_t i = 0; i < D; ++i) r[i] = a[i] * s;
  return r;
}

// Accumulates left to right; the grid code relies on this fixed order for
// monotone rounding of projections.
template <std::size_t D>
constexpr double dot(const Vec<D>& a, const Vec<D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t D>
double norm(const Vec<D>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t D>
bool is_finite(const Vec<D>& a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Determinant by Gaussian elimination with partial pivoting.
template <std::size_t N>
double determinant(Matrix<N> m) {
  double det = 1.0;
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (m[pivot][col] == 0.0) return 0.0;
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < N; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

/// Symmetric matrix with packed upper-triangle storage, so (i,j) and (j,i)
/// always name the same entry.
template <std::size_t D>
class SymMatrix {
  static_assert(D >= 1, "dimension must be positive");

 public:
  static constexpr std::size_t kDim = D;
  static constexpr std::size_t kPacked = D * (D + 1) / 2;

  constexpr SymMatrix() = default;

  static SymMatrix identity() {
    SymMatrix m;
    for (std::size_t i = 0; i < D; ++i) m(i, i) = 1.0;
    return m;
  }

  static SymMatrix diagonal(const Vec<D>& d) {
    SymMatrix m;
    for (std::size_t i = 0; i < D; ++i) m(i, i) = d[i];
    return m;
  }

  /// Symmetrizes an arbitrary square matrix as (A + A^T) / 2.
  static SymMatrix from_dense(const Matrix<D>& a) {
    SymMatrix m;
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = i; j < D; ++j) m(i, j) = 0.5 * (a[i][j] + a[j][i]);
    return m;
  }

  /// u u^T scaled by alpha.
  static SymMatrix outer(const Vec<D>& u, double alpha = 1.0) {
    SymMatrix m;
    m.add_outer(u, alpha);
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

  void add_outer(const Vec<D>& u, double alpha = 1.0) {
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = i; j < D; ++j) data_[index(i, j)] += alpha * u[i] * u[j];
  }

  SymMatrix& operator+=(const SymMatrix& o) {
    for (std::size_t k = 0; k < kPacked; ++k) data_[k] += o.data_[k];
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    for (std::size_t k = 0; k < kPacked; ++k) data_[k] -= o.data_[k];
    return *this;
  }
  SymMatrix& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

  Vec<D> operator*(const Vec<D>& v) const {
    Vec<D> r{};
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  double quadratic_form(const Vec<D>& v) const { return dot(v, (*this) * v); }

  /// Maximum absolute row sum.
  double inf_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < D; ++j) row += std::abs((*this)(i, j));
      best = std::max(best, row);
    }
    return best;
  }

  double frobenius() const {
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < D; ++i) t += (*this)(i, i);
    return t;
  }

  bool is_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  Matrix<D> dense() const {
    Matrix<D> a{};
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j) a[i][j] = (*this)(i, j);
    return a;
  }

 private:
  static constexpr std::size_t index(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return i * D - i * (i + 1) / 2 + j;
  }

  std::array<double, kPacked> data_{};
};

/// R S R^T for a square R.
template <std::size_t D>
SymMatrix<D> congruence(const Matrix<D>& r, const SymMatrix<D>& s) {
  Matrix<D> out{};
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < D; ++k)
        for (std::size_t l = 0; l < D; ++l) acc += r[i][k] * s(k, l) * r[j][l];
      out[i][j] = acc;
    }
  return SymMatrix<D>::from_dense(out);
}

template <std::size_t D>
Vec<D> mat_vec(const Matrix<D>& r, const Vec<D>& v) {
  Vec<D> out{};
  for (std::size_t i = 0; i < D; ++i) out[i] = dot(r[i], v);
  return out;
}

/// Eigenvalues sorted non-increasing; eigenvectors[i] pairs with eigenvalues[i].
template <std::size_t D>
struct Spectrum {
  Vec<D> eigenvalues{};
  std::array<Vec<D>, D> eigenvectors{};
};

/// Orthonormal axes in decreasing-variance order with canonical signs.
template <std::size_t D>
struct Frame {
  std::array<Vec<D>, D> axes{};

  static Frame identity() {
    Frame f;
    for (std::size_t i = 0; i < D; ++i) f.axes[i][i] = 1.0;
    return f;
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct JacobiOptions {
  int max_sweeps = 100;
  double relative_threshold = 1e-13;
};

/// Cyclic Jacobi eigendecomposition. Converged once the Frobenius norm of the
/// off-diagonal part is at most `relative_threshold * ||S||_inf`.
template <std::size_t D>
Spectrum<D> jacobi_eigendecompose(const SymMatrix<D>& s, JacobiOptions opts = {}) {
  if (!s.is_finite()) throw Error(ErrorCode::NonFinite, "matrix has a NaN or infinite entry");

  Matrix<D> a = s.dense();
  Matrix<D> v{};
  for (std::size_t i = 0; i < D; ++i) v[i][i] = 1.0;

  const double limit = opts.relative_threshold * s.inf_norm();
  auto off_norm = [&a] {
    double acc = 0.0;
    for (std::size_t p = 0; p < D; ++p)
      for (std::size_t q = p + 1; q < D; ++q) acc += 2.0 * a[p][q] * a[p][q];
    return std::sqrt(acc);
  };

  bool converged = off_norm() <= limit;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < D; ++p) {
      for (std::size_t q = p + 1; q < D; ++q) {
        const double apq = a[p][q];
        if (apq == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < D; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - sn * akq;
          a[k][q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < D; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - sn * aqk;
          a[q][k] = sn * apk + c * aqk;
        }
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        for (std::size_t k = 0; k < D; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - sn * vkq;
          v[k][q] = sn * vkp + c * vkq;
        }
      }
    }
    converged = off_norm() <= limit;
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "Jacobi sweep limit reached");

  std::array<std::size_t, D> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });

  Spectrum<D> out;
  for (std::size_t i = 0; i < D; ++i) {
    const std::size_t col = order[i];
    out.eigenvalues[i] = a[col][col];
    for (std::size_t k = 0; k < D; ++k) out.eigenvectors[i][k] = v[k][col];
  }
  return out;
}

/// Flips each eigenvector so that its largest-magnitude coordinate is
/// positive. Magnitudes within 1e-12 of the maximum count as ties and the
/// lowest coordinate index wins.
template <std::size_t D>
Frame<D> principal_frame(const Spectrum<D>& spec) {
  Frame<D> f;
  for (std::size_t i = 0; i < D; ++i) {
    const Vec<D>& v = spec.eigenvectors[i];
    double biggest = 0.0;
    for (double x : v) biggest = std::max(biggest, std::abs(x));
    std::size_t lead = 0;
    for (std::size_t k = 0; k < D; ++k) {
      if (std::abs(v[k]) >= biggest - 1e-12) {
        lead = k;
        break;
      }
    }
    f.axes[i] = v[lead] < 0.0 ? scale(v, -1.0) : v;
  }
  return f;
}

template <std::size_t D>
Frame<D> principal_frame(const SymMatrix<D>& cov) {
  return principal_frame(jacobi_eigendecompose(cov));
}

}  // namespace dynpca
