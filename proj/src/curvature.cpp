#include "finsler/curvature.hpp"

#include <cmath>

namespace finsler {

namespace {

size_t idx3(int n, int i, int j, int k) { return (static_cast<size_t>(i) * n + j) * n + k; }

struct SymbolDerivatives {
  VecD gamma;               // symbols at the sample
  std::vector<VecD> dx;     // dx[p] = d gamma / dx^p
  std::vector<VecD> dy;     // dy[m] = d gamma / dy^m
};

SymbolDerivatives symbol_derivatives(const AnisotropicConnection& conn,
                                     const TangentSample& sample) {
  const int n = conn.dim();
  SymbolDerivatives out;
  out.gamma = conn.christoffel(sample);
  out.dx.resize(static_cast<size_t>(n));
  out.dy.resize(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    VecD ep(static_cast<size_t>(n), 0.0);
    ep[static_cast<size_t>(p)] = 1.0;
    Vec<Dual<double>> fx =
        conn.christoffel<1>(promote(sample.x, ep), promote_const(sample.v));
    Vec<Dual<double>> fy =
        conn.christoffel<1>(promote_const(sample.x), promote(sample.v, ep));
    out.dx[static_cast<size_t>(p)].resize(fx.size());
    out.dy[static_cast<size_t>(p)].resize(fy.size());
    for (size_t q = 0; q < fx.size(); ++q) {
      out.dx[static_cast<size_t>(p)][q] = fx[q].b;
      out.dy[static_cast<size_t>(p)][q] = fy[q].b;
    }
  }
  return out;
}

}  // namespace

VerticalDerivValue vertical_derivative_connection(const AnisotropicConnection& conn,
                                                  const TangentSample& sample) {
  conn.domain().require(sample, "vertical_derivative_connection");
  const int n = conn.dim();
  VerticalDerivValue out;
  out.p = TensorValue(Valence{1, 3}, n);
  for (int k = 0; k < n; ++k) {
    VecD ek(static_cast<size_t>(n), 0.0);
    ek[static_cast<size_t>(k)] = 1.0;
    Vec<Dual<double>> f = conn.christoffel<1>(promote_const(sample.x), promote(sample.v, ek));
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.p.at({l, i, j, k}) = f[idx3(n, l, i, j)].b;
  }
  return out;
}

VecD affine_curvature(const AnisotropicConnection& conn, const ExtensionField& ext,
                      const TangentSample& sample, const VecD& u, const VecD& w, const VecD& z) {
  conn.domain().require(sample, "affine_curvature");
  require_extends(ext, sample, "affine_curvature");
  const int n = conn.dim();
  // symbols of the affine connection nabla^V: tilde G(x) = G(x, V(x))
  VecD gamma = conn.christoffel(sample);
  std::vector<VecD> dx(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    VecD ep(static_cast<size_t>(n), 0.0);
    ep[static_cast<size_t>(p)] = 1.0;
    auto x1 = promote(sample.x, ep);
    Vec<Dual<double>> f = conn.christoffel<1>(x1, ext.field.eval<1>(x1));
    dx[static_cast<size_t>(p)].resize(f.size());
    for (size_t q = 0; q < f.size(); ++q) dx[static_cast<size_t>(p)][q] = f[q].b;
  }
  VecD out(static_cast<size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int p = 0; p < n; ++p)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          acc += (u[p] * w[j] - w[p] * u[j]) * z[i] * dx[static_cast<size_t>(p)][idx3(n, k, j, i)];
          for (int l = 0; l < n; ++l)
            acc += u[p] * w[j] * z[i] *
                   (gamma[idx3(n, l, j, i)] * gamma[idx3(n, k, p, l)] -
                    gamma[idx3(n, l, p, i)] * gamma[idx3(n, k, j, l)]);
        }
    out[static_cast<size_t>(k)] = acc;
  }
  return out;
}

CurvatureValue curvature_tensor(const AnisotropicConnection& conn, const TangentSample& sample) {
  conn.domain().require(sample, "curvature_tensor");
  const int n = conn.dim();
  SymbolDerivatives sd = symbol_derivatives(conn, sample);

  // W^m_p = G^m_{pl} v^l; the constant-extension horizontal correction.
  MatD wmat(n);
  for (int m = 0; m < n; ++m)
    for (int p = 0; p < n; ++p) {
      double acc = 0.0;
      for (int l = 0; l < n; ++l) acc += sd.gamma[idx3(n, m, p, l)] * sample.v[l];
      wmat(m, p) = acc;
    }
  // H[p] = d gamma/dx^p - W^m_p d gamma/dy^m
  std::vector<VecD> h(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    h[static_cast<size_t>(p)] = sd.dx[static_cast<size_t>(p)];
    for (int m = 0; m < n; ++m) {
      if (wmat(m, p) == 0.0) continue;
      const VecD& dym = sd.dy[static_cast<size_t>(m)];
      for (size_t q = 0; q < dym.size(); ++q) h[static_cast<size_t>(p)][q] -= wmat(m, p) * dym[q];
    }
  }

  CurvatureValue out;
  out.r = TensorValue(Valence{1, 3}, n);
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < n; ++p)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double acc = h[static_cast<size_t>(p)][idx3(n, k, j, i)] -
                       h[static_cast<size_t>(j)][idx3(n, k, p, i)];
          for (int l = 0; l < n; ++l)
            acc += sd.gamma[idx3(n, l, j, i)] * sd.gamma[idx3(n, k, p, l)] -
                   sd.gamma[idx3(n, l, p, i)] * sd.gamma[idx3(n, k, j, l)];
          out.r.at({k, p, j, i}) = acc;
        }
  return out;
}

VecD curvature_tensor(const AnisotropicConnection& conn, const TangentSample& sample,
                      const VecD& u, const VecD& w, const VecD& z) {
  return curvature_tensor(conn, sample).apply(u, w, z);
}

VecD curvature_tensor_operator_route(const AnisotropicConnection& conn, const ExtensionField& ext,
                                     const TangentSample& sample, const VecD& u, const VecD& w,
                                     const VecD& z) {
  const int n = conn.dim();
  VecD rv = affine_curvature(conn, ext, sample, u, w, z);
  VerticalDerivValue p = vertical_derivative_connection(conn, sample);
  VecD gamma = conn.christoffel(sample);
  MatD jac = ext.field.jacobian(sample.x);
  auto nabla_v = [&](const VecD& dir) {
    VecD out(static_cast<size_t>(n), 0.0);
    for (int m = 0; m < n; ++m) {
      double acc = 0.0;
      for (int q = 0; q < n; ++q) {
        acc += dir[q] * jac(m, q);
        for (int l = 0; l < n; ++l) acc += dir[q] * sample.v[l] * gamma[idx3(n, m, q, l)];
      }
      out[m] = acc;
    }
    return out;
  };
  VecD du = nabla_v(u), dw = nabla_v(w);
  VecD pu = p.apply(w, z, du);
  VecD pw = p.apply(u, z, dw);
  for (int k = 0; k < n; ++k) rv[k] += -pu[k] + pw[k];
  return rv;
}

VerticalDerivValue berwald_tensor(const SpraySpec& spray, const TangentSample& sample) {
  spray.domain().require(sample, "berwald_tensor");
  const int n = spray.dim();
  VerticalDerivValue out;
  out.p = TensorValue(Valence{1, 3}, n);
  auto x3 = promote_const(promote_const(promote_const(sample.x)));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        VecD ei(static_cast<size_t>(n), 0.0), ej(static_cast<size_t>(n), 0.0),
            ek(static_cast<size_t>(n), 0.0);
        ei[static_cast<size_t>(i)] = 1.0;
        ej[static_cast<size_t>(j)] = 1.0;
        ek[static_cast<size_t>(k)] = 1.0;
        auto v3 = promote(promote(promote(sample.v, ei), ej), ek);
        Vec<DualLevel<3>> g = spray.coefficients<3>(x3, v3);
        for (int l = 0; l < n; ++l) {
          double val = 0.5 * top_mixed(g[static_cast<size_t>(l)]);
          int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
          for (auto& pr : perm) out.p.at({l, pr[0], pr[1], pr[2]}) = val;
        }
      }
  return out;
}

double landsberg_tensor(const MetricSpec& metric, const TangentSample& sample, const VecD& u,
                        const VecD& w, const VecD& z) {
  VerticalDerivValue b = berwald_tensor(spray_from_metric(metric), sample);
  MatD g = fundamental_tensor(metric, sample).g;
  VecD bv = b.apply(u, w, z);
  return bilinear(g, bv, sample.v);
}

TensorValue landsberg_tensor_full(const MetricSpec& metric, const TangentSample& sample) {
  const int n = metric.dim();
  VerticalDerivValue b = berwald_tensor(spray_from_metric(metric), sample);
  MatD g = fundamental_tensor(metric, sample).g;
  TensorValue out(Valence{0, 3}, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m) acc += g(l, m) * b.p.at({l, i, j, k}) * sample.v[m];
        out.at({i, j, k}) = acc;
      }
  return out;
}

double vertical_property_residual(const AnisotropicConnection& conn, const TangentSample& sample) {
  const int n = conn.dim();
  VerticalDerivValue p = vertical_derivative_connection(conn, sample);
  double worst = 0.0, scale = 0.0;
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          acc += p.p.at({l, i, j, k}) * sample.v[i] * sample.v[j];
          scale = std::max(scale,
                           std::fabs(p.p.at({l, i, j, k})) * std::fabs(sample.v[i] * sample.v[j]));
        }
      worst = std::max(worst, std::fabs(acc));
    }
  return worst / std::max(1.0, scale);
}

VecD curvature_operator(const AnisotropicConnection& conn, const CurveSamples& geodesic, double t,
                        const VecD& u) {
  TangentSample s = geodesic.sample(t);
  double resid = vertical_property_residual(conn, s);
  if (resid > kVerticalPropertyTolerance)
    throw PreconditionError("curvature_operator: P_v(v,v,.) residual " + std::to_string(resid) +
                            " violates the vertical property at t=" + std::to_string(t));
  return curvature_tensor(conn, s, s.v, u, s.v);
}

JacobiField integrate_jacobi(const AnisotropicConnection& conn, const CurveSamples& geodesic,
                             const VecD& j0, const VecD& j0_dot, std::pair<double, double> t_span,
                             double tol) {
  const int n = conn.dim();
  geodesic.require_covers(t_span.first, "integrate_jacobi");
  geodesic.require_covers(t_span.second, "integrate_jacobi");
  {
    double resid = vertical_property_residual(conn, geodesic.sample(t_span.first));
    if (resid > kVerticalPropertyTolerance)
      throw PreconditionError("integrate_jacobi: P_v(v,v,.) residual " + std::to_string(resid) +
                              " violates the vertical property");
  }

  auto a_matrix = [&](double t, const VecD& flat, const VecD& gdot) {
    MatD a(n);
    (void)t;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += gdot[j] * flat[idx3(n, k, j, i)];
        a(k, i) = acc;
      }
    return a;
  };

  OdeRhs rhs = [&conn, &geodesic, n, &a_matrix](double t, const VecD& y, VecD& dy) {
    TangentSample s = geodesic.sample(t);
    VecD flat = conn.christoffel<0>(s.x, s.v);
    MatD a = a_matrix(t, flat, s.v);
    CurvatureValue r = curvature_tensor(conn, s);
    MatD m(n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int p = 0; p < n; ++p)
          for (int i = 0; i < n; ++i) acc += r.r.at({k, p, j, i}) * s.v[p] * s.v[i];
        m(k, j) = acc;
      }
    dy.resize(2 * static_cast<size_t>(n));
    // J' = U - A J ; U' = M J - A U
    for (int k = 0; k < n; ++k) {
      double aj = 0.0, au = 0.0, mj = 0.0;
      for (int i = 0; i < n; ++i) {
        aj += a(k, i) * y[i];
        au += a(k, i) * y[n + i];
        mj += m(k, i) * y[i];
      }
      dy[k] = y[n + k] - aj;
      dy[n + k] = mj - au;
    }
  };

  VecD y0(2 * static_cast<size_t>(n));
  {
    TangentSample s0 = geodesic.sample(t_span.first);
    VecD flat = conn.christoffel<0>(s0.x, s0.v);
    MatD a0 = a_matrix(t_span.first, flat, s0.v);
    for (int k = 0; k < n; ++k) {
      y0[k] = j0[k];
      double acc = j0_dot[k];
      for (int i = 0; i < n; ++i) acc += a0(k, i) * j0[i];
      y0[n + k] = acc;  // U = Jdot + A J
    }
  }

  OdeOptions opts;
  opts.rel_tol = std::max(5e-14, tol * 1e-3);
  opts.abs_tol = opts.rel_tol;
  opts.max_step = std::fabs(t_span.second - t_span.first) / 16.0;
  DenseOde sol = integrate_ode(rhs, std::move(y0), t_span.first, t_span.second, opts);
  return JacobiField(n, std::move(sol));
}

double jacobi_residual(const AnisotropicConnection& conn, const CurveSamples& geodesic,
                       const JacobiField& field) {
  const int n = conn.dim();
  double worst = 0.0;
  auto grid = field.grid();
  for (size_t q = 0; q + 1 < grid.size(); ++q) {
    double tm = 0.5 * (grid[q] + grid[q + 1]);
    TangentSample s = geodesic.sample(tm);
    VecD flat = conn.christoffel<0>(s.x, s.v);
    CurvatureValue r = curvature_tensor(conn, s);
    VecD j = field.value(tm), u = field.covariant_derivative(tm);
    VecD jdot = field.derivative(tm);
    VecD state_dot = field.dense().derivative(tm);
    VecD rj = r.apply(s.v, j, s.v);
    // absolute/relative residuals of J' = U - A J and U' = R_gamma(J) - A U
    for (int k = 0; k < n; ++k) {
      double aj = 0.0, au = 0.0;
      for (int i = 0; i < n; ++i) {
        double a_ki = 0.0;
        for (int jj = 0; jj < n; ++jj) a_ki += s.v[jj] * flat[idx3(n, k, jj, i)];
        aj += a_ki * j[i];
        au += a_ki * u[i];
      }
      double f1 = u[k] - aj, f2 = rj[k] - au;
      worst = std::max(worst, std::fabs(jdot[k] - f1) / (1.0 + std::fabs(f1)));
      worst = std::max(worst,
                       std::fabs(state_dot[static_cast<size_t>(n + k)] - f2) / (1.0 + std::fabs(f2)));
    }
  }
  return worst;
}

}  // namespace finsler
