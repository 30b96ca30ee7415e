#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "finsler/dual.hpp"
#include "finsler/errors.hpp"

namespace finsler {

template <class S>
using Vec = std::vector<S>;
using VecD = Vec<double>;

/// Dense square matrix over a (possibly dual) scalar.
template <class S>
struct Mat {
  int n = 0;
  Vec<S> a;

  Mat() = default;
  explicit Mat(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, S{}) {}

  S& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  const S& operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = S{1.0};
    return m;
  }
};
using MatD = Mat<double>;

template <class S>
S dot(const Vec<S>& x, const Vec<S>& y) {
  S s{};
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const VecD& x) { return std::sqrt(dot(x, x)); }

inline double max_abs(const VecD& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

template <class S>
Vec<S> matvec(const Mat<S>& m, const Vec<S>& x) {
  Vec<S> y(m.n, S{});
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) y[i] += m(i, j) * x[j];
  return y;
}

/// g(x, y) for a symmetric bilinear form given by its matrix.
template <class S>
S bilinear(const Mat<S>& g, const Vec<S>& x, const Vec<S>& y) {
  S s{};
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) s += g(i, j) * x[i] * y[j];
  return s;
}

namespace detail {

// In-place LU with partial pivoting on the real parts. Returns false when a
// pivot is exactly zero (in real part), which callers surface as degeneracy.
template <class S>
bool lu_factor(Mat<S>& m, std::vector<int>& perm, int& sign) {
  const int n = m.n;
  perm.resize(n);
  sign = 1;
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::fabs(real_of(m(k, k)));
    for (int i = k + 1; i < n; ++i) {
      double v = std::fabs(real_of(m(i, k)));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return false;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(perm[k], perm[piv]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      S f = m(i, k) / m(k, k);
      m(i, k) = f;
      for (int j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return true;
}

}  // namespace detail

template <class S>
S determinant(Mat<S> m) {
  std::vector<int> perm;
  int sign = 1;
  if (!detail::lu_factor(m, perm, sign)) return S{};
  S d{1.0};
  for (int i = 0; i < m.n; ++i) d *= m(i, i);
  return S{static_cast<double>(sign)} * d;
}

struct InverseInfo {
  double det = 0.0;        // real part of the determinant
  double condition = 0.0;  // infinity-norm condition estimate of the real parts
};

/// Inverse by pivoted LU. Throws DegeneracyError on a zero pivot; fills
/// `info` (when given) with the determinant and a condition estimate so
/// callers can warn on badly conditioned metrics.
template <class S>
Mat<S> inverse(const Mat<S>& m, InverseInfo* info = nullptr) {
  const int n = m.n;
  Mat<S> lu = m;
  std::vector<int> perm;
  int sign = 1;
  if (!detail::lu_factor(lu, perm, sign)) {
    throw DegeneracyError("matrix inverse: zero pivot (singular matrix)");
  }
  Mat<S> inv(n);
  Vec<S> col(n);
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < n; ++i) col[i] = S{perm[i] == c ? 1.0 : 0.0};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) col[i] -= lu(i, j) * col[j];
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) col[i] -= lu(i, j) * col[j];
      col[i] /= lu(i, i);
    }
    for (int i = 0; i < n; ++i) inv(i, c) = col[i];
  }
  if (info) {
    S d{1.0};
    for (int i = 0; i < n; ++i) d *= lu(i, i);
    info->det = sign * real_of(d);
    double norm_m = 0.0, norm_inv = 0.0;
    for (int i = 0; i < n; ++i) {
      double rm = 0.0, ri = 0.0;
      for (int j = 0; j < n; ++j) {
        rm += std::fabs(real_of(m(i, j)));
        ri += std::fabs(real_of(inv(i, j)));
      }
      norm_m = std::max(norm_m, rm);
      norm_inv = std::max(norm_inv, ri);
    }
    info->condition = norm_m * norm_inv;
  }
  return inv;
}

}  // namespace finsler
