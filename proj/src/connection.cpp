#include "finsler/connection.hpp"

#include <cmath>

#include "finsler/sampling.hpp"

namespace finsler {

void AnisotropicConnection::validate(int probes, uint64_t seed) const {
  auto samples = draw_samples(domain_, probes, seed);
  const int n = dim();
  for (const auto& s : samples) {
    VecD flat = christoffel(s);
    for (double c : flat)
      if (!std::isfinite(c))
        throw EvaluationError(name_ + ": non-finite Christoffel symbols at x=" + format_vec(s.x));
    if (!torsion_free_) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
          if (std::fabs(symbol(flat, i, j, k) - symbol(flat, i, k, j)) > 1e-10)
            throw EvaluationError(name_ + ": torsion-free claim violated at x=" + format_vec(s.x));
  }
}

AnisotropicConnection berwald_connection(const SpraySpec& spray) {
  return AnisotropicConnection(
      spray.domain(),
      [spray](const auto& x, const auto& v) { return detail::berwald_symbols(spray, x, v); },
      /*torsion_free=*/true, "berwald");
}

AnisotropicConnection chern_connection(const MetricSpec& metric) {
  const ScalarField L = metric.lagrangian();
  return AnisotropicConnection(
      metric.domain(),
      [L](const auto& x, const auto& v) { return detail::chern_symbols(L, x, v); },
      /*torsion_free=*/true, "chern");
}

VecD covariant_derivative_vector(const AnisotropicConnection& conn, const TangentSample& sample,
                                 const VectorField& x_field, const VectorField& y_field) {
  const int n = conn.dim();
  VecD xv = x_field(sample.x);
  MatD jy = y_field.jacobian(sample.x);
  VecD yv = y_field(sample.x);
  VecD flat = conn.christoffel(sample);
  VecD out(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += xv[j] * jy(i, j);
      for (int k = 0; k < n; ++k) acc += xv[j] * yv[k] * conn.symbol(flat, i, j, k);
    }
    out[i] = acc;
  }
  return out;
}

AnisotropicDerivation covariant_derivation(const AnisotropicConnection& conn,
                                           const VectorField& x_field) {
  AnisotropicDerivation d;
  d.Z = x_field;
  d.delta = [conn, x_field](const TangentSample& sample, const VectorField& y_field) {
    return covariant_derivative_vector(conn, sample, x_field, y_field);
  };
  return d;
}

TensorValue covariant_derivative_tensor(const AnisotropicConnection& conn,
                                        const VectorField& x_field,
                                        const AnisotropicTensorField& t,
                                        const TangentSample& sample, const ExtensionField& ext) {
  return derive_tensor(covariant_derivation(conn, x_field), t, sample, ext);
}

TensorValue covariant_derivative_tensor(const AnisotropicConnection& conn,
                                        const VectorField& x_field,
                                        const AnisotropicTensorField& t,
                                        const TangentSample& sample) {
  return covariant_derivative_tensor(conn, x_field, t, sample,
                                     make_extension(sample, ExtensionMode::constant));
}

VecD covariant_derivative_along_curve(const AnisotropicConnection& conn, const CurveSamples& curve,
                                      const CurveField& field, double t, const TangentSample& v) {
  const int n = conn.dim();
  VecD point = curve.position(t);
  for (int i = 0; i < n; ++i)
    if (std::fabs(point[i] - v.x[i]) > 1e-8)
      throw UsageError("covariant_derivative_along_curve: v does not sit over the curve point");
  VecD flat = conn.christoffel(v);
  VecD xdot = field.derivative(t);
  VecD xval = field.value(t);
  VecD gdot = curve.velocity(t);
  VecD out(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    double acc = xdot[k];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) acc += xval[i] * gdot[j] * conn.symbol(flat, k, j, i);
    out[k] = acc;
  }
  return out;
}

CurveSamples connection_geodesic(const AnisotropicConnection& conn, const VecD& x0, const VecD& v0,
                                 std::pair<double, double> t_span, double tol) {
  const int n = conn.dim();
  TangentSample start(x0, v0);
  conn.domain().require(start, "connection_geodesic");

  OdeRhs rhs = [&conn, n](double, const VecD& y, VecD& dy) {
    VecD x(y.begin(), y.begin() + n);
    VecD v(y.begin() + n, y.end());
    VecD flat = conn.christoffel<0>(x, v);
    dy.resize(2 * static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
      dy[k] = v[k];
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += v[i] * v[j] * conn.symbol(flat, k, i, j);
      dy[n + k] = -acc;
    }
  };
  OdeInside inside = [&conn, n](double, const VecD& y) {
    VecD x(y.begin(), y.begin() + n);
    VecD v(y.begin() + n, y.end());
    return conn.domain().contains(x, v);
  };

  VecD y0(2 * static_cast<size_t>(n));
  std::copy(x0.begin(), x0.end(), y0.begin());
  std::copy(v0.begin(), v0.end(), y0.begin() + n);

  OdeOptions opts;
  opts.rel_tol = std::max(5e-14, tol * 1e-4);
  opts.abs_tol = opts.rel_tol;
  opts.max_step = std::fabs(t_span.second - t_span.first) / 16.0;
  DenseOde sol = integrate_ode(rhs, std::move(y0), t_span.first, t_span.second, opts, inside);
  return CurveSamples(n, std::move(sol));
}

double connection_geodesic_residual(const AnisotropicConnection& conn, const CurveSamples& curve) {
  const int n = conn.dim();
  double worst = 0.0;
  auto grid = curve.grid();
  for (size_t q = 0; q + 1 < grid.size(); ++q) {
    double tm = 0.5 * (grid[q] + grid[q + 1]);
    VecD x = curve.position(tm), v = curve.velocity(tm), a = curve.acceleration(tm);
    if (!conn.domain().contains(x, v)) continue;
    VecD flat = conn.christoffel<0>(x, v);
    for (int k = 0; k < n; ++k) {
      double rhs = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rhs += v[i] * v[j] * conn.symbol(flat, k, i, j);
      worst = std::max(worst, std::fabs(a[k] + rhs) / (1.0 + std::fabs(rhs)));
    }
  }
  return worst;
}

TensorValue difference_tensor(const AnisotropicConnection& conn1,
                              const AnisotropicConnection& conn2, const TangentSample& sample) {
  if (conn1.dim() != conn2.dim()) throw UsageError("difference_tensor: dimension mismatch");
  VecD f1 = conn1.christoffel(sample);
  VecD f2 = conn2.christoffel(sample);
  TensorValue out(Valence{1, 2}, conn1.dim());
  for (size_t q = 0; q < f1.size(); ++q) out.c[q] = f1[q] - f2[q];
  return out;
}

AnisotropicTensorField difference_tensor_field(const AnisotropicConnection& conn1,
                                               const AnisotropicConnection& conn2) {
  if (conn1.dim() != conn2.dim()) throw UsageError("difference_tensor_field: dimension mismatch");
  const int n = conn1.dim();
  return {Valence{1, 2}, n, [conn1, conn2, n](const auto& x, const auto& v) {
            using S = std::decay_t<decltype(x[0])>;
            constexpr int K = level_of<S>;
            Vec<S> f1 = conn1.christoffel<K>(x, v);
            Vec<S> f2 = conn2.christoffel<K>(x, v);
            TensorValueT<S> out(Valence{1, 2}, n);
            for (size_t q = 0; q < f1.size(); ++q) out.c[q] = f1[q] - f2[q];
            return out;
          }};
}

}  // namespace finsler
