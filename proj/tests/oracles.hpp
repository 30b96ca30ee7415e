#pragma once

// Test-side oracles. Everything here is independent of the dual-number
// differentiation path: central finite differences with one Richardson step,
// Levi-Civita symbols straight from raw metric coefficients, and the
// classical Riemann tensor assembled from those symbols.

#include <functional>

#include "finsler/fields.hpp"
#include "finsler/metric.hpp"

namespace finsler::testing {

/// Central difference with one Richardson extrapolation step.
inline double central_diff(const std::function<double(double)>& f, double h) {
  auto d = [&](double step) { return (f(step) - f(-step)) / (2.0 * step); };
  double coarse = d(h), fine = d(h / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

inline double fd_step(const TangentSample& s, int order) {
  double base = std::max(1.0, norm2(s.v));
  // Third derivatives need a larger step to stay above roundoff.
  return (order >= 3 ? 5e-3 : 1e-4) * base;
}

/// FD fiber derivative along up to three directions (nested central diffs).
inline double fd_fiber(const ScalarField& f, const TangentSample& s,
                       const std::vector<VecD>& dirs, double h = 0.0) {
  const int order = static_cast<int>(dirs.size());
  if (h == 0.0) h = fd_step(s, order);
  std::function<double(const VecD&)> eval = [&](const VecD& v) { return f(s.x, v); };
  std::function<double(const VecD&, int)> diff = [&](const VecD& v, int k) -> double {
    if (k == 0) return eval(v);
    return central_diff(
        [&](double t) {
          VecD vt = v;
          for (size_t i = 0; i < vt.size(); ++i) vt[i] += t * dirs[k - 1][i];
          return diff(vt, k - 1);
        },
        h);
  };
  return diff(s.v, order);
}

inline double fd_base(const ScalarField& f, const TangentSample& s, const VecD& u,
                      double h = 0.0) {
  if (h == 0.0) h = fd_step(s, 1);
  return central_diff(
      [&](double t) {
        VecD xt = s.x;
        for (size_t i = 0; i < xt.size(); ++i) xt[i] += t * u[i];
        return f(xt, s.v);
      },
      h);
}

/// Levi-Civita symbols of a Riemannian coefficient field, by the closed
/// formula with FD coefficient derivatives. Flat layout [i][j][k].
inline std::vector<double> levi_civita(const MatrixField& a, const VecD& x, double h = 1e-5) {
  const int n = a.dim();
  std::vector<MatD> da(n);  // da[p](i,j) = d a_ij / dx^p
  for (int p = 0; p < n; ++p) {
    da[p] = MatD(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        da[p](i, j) = central_diff(
            [&](double t) {
              VecD xt = x;
              xt[p] += t;
              return a(xt)(i, j);
            },
            h);
  }
  MatD ainv = inverse(a(x));
  std::vector<double> gamma(static_cast<size_t>(n) * n * n, 0.0);
  auto idx = [n](int i, int j, int k) { return (static_cast<size_t>(i) * n + j) * n + k; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l)
          sum += ainv(i, l) * (da[j](l, k) + da[k](j, l) - da[l](j, k));
        gamma[idx(i, j, k)] = 0.5 * sum;
      }
  return gamma;
}

/// Classical Riemann tensor R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj}
/// + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj} from the Levi-Civita oracle,
/// with FD derivatives of the symbols. R(e_k, e_l) e_j = R^i_{jkl} e_i.
inline std::vector<double> riemann_classical(const MatrixField& a, const VecD& x,
                                             double h = 1e-4) {
  const int n = a.dim();
  auto idx3 = [n](int i, int j, int k) { return (static_cast<size_t>(i) * n + j) * n + k; };
  auto idx4 = [n](int i, int j, int k, int l) {
    return ((static_cast<size_t>(i) * n + j) * n + k) * n + l;
  };
  std::vector<double> gamma = levi_civita(a, x);
  std::vector<std::vector<double>> dgamma(n);
  for (int p = 0; p < n; ++p) {
    dgamma[p].resize(static_cast<size_t>(n) * n * n);
    for (size_t c = 0; c < dgamma[p].size(); ++c)
      dgamma[p][c] = central_diff(
          [&](double t) {
            VecD xt = x;
            xt[p] += t;
            return levi_civita(a, xt)[c];
          },
          h);
  }
  std::vector<double> r(static_cast<size_t>(n) * n * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double sum = dgamma[k][idx3(i, l, j)] - dgamma[l][idx3(i, k, j)];
          for (int m = 0; m < n; ++m)
            sum += gamma[idx3(i, k, m)] * gamma[idx3(m, l, j)] -
                   gamma[idx3(i, l, m)] * gamma[idx3(m, k, j)];
          r[idx4(i, j, k, l)] = sum;
        }
  return r;
}

}  // namespace finsler::testing
