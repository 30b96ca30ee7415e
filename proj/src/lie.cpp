#include "finsler/lie.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "finsler/ode.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

AnisotropicDerivation lie_derivation(const VectorField& x_field) {
  AnisotropicDerivation d;
  d.Z = x_field;
  d.delta = [x_field](const TangentSample& s, const VectorField& y_field) {
    MatD jy = y_field.jacobian(s.x);
    MatD jx = x_field.jacobian(s.x);
    VecD xy = matvec(jy, x_field(s.x));
    VecD yx = matvec(jx, y_field(s.x));
    VecD out(xy.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = xy[i] - yx[i];
    return out;
  };
  return d;
}

TensorValue lie_derivative_tensor(const VectorField& x_field, const AnisotropicTensorField& t,
                                  const TangentSample& sample, const ExtensionField& ext) {
  return derive_tensor(lie_derivation(x_field), t, sample, ext);
}

TensorValue lie_derivative_tensor(const VectorField& x_field, const AnisotropicTensorField& t,
                                  const TangentSample& sample) {
  return lie_derivative_tensor(x_field, t, sample,
                               make_extension(sample, ExtensionMode::constant));
}

namespace {

VecD nabla_dir_x(const AnisotropicConnection& conn, const TangentSample& sample,
                 const VectorField& x_field, const VecD& dir) {
  // nabla^v_dir X = dir^j dX/dx^j + dir^j X^k G^i_jk(v)
  const int n = conn.dim();
  MatD jx = x_field.jacobian(sample.x);
  VecD xv = x_field(sample.x);
  VecD flat = conn.christoffel(sample);
  VecD out = matvec(jx, dir);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out[i] += dir[j] * xv[k] * conn.symbol(flat, i, j, k);
  return out;
}

}  // namespace

double lie_derivative_metric(const VectorField& x_field, const MetricSpec& metric,
                             const TangentSample& sample) {
  auto chern = chern_connection(metric);
  MatD g = fundamental_tensor(metric, sample).g;
  VecD nx = nabla_dir_x(chern, sample, x_field, sample.v);
  return 2.0 * bilinear(g, nx, sample.v);
}

TensorValue lie_derivative_fundamental(const VectorField& x_field, const MetricSpec& metric,
                                       const TangentSample& sample) {
  const int n = metric.dim();
  auto chern = chern_connection(metric);
  MatD g = fundamental_tensor(metric, sample).g;
  CartanTensorValue c = cartan_tensor(metric, sample);
  VecD nv = nabla_dir_x(chern, sample, x_field, sample.v);

  std::vector<VecD> nframe(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    VecD ej(static_cast<size_t>(n), 0.0);
    ej[static_cast<size_t>(j)] = 1.0;
    nframe[static_cast<size_t>(j)] = nabla_dir_x(chern, sample, x_field, ej);
  }

  // L_X(g)(u,w) = g(nabla_u X, w) + g(u, nabla_w X) + 2 C(nabla_v X, u, w).
  // The Cartan-term sign follows from substituting metric compatibility into
  // the bracket formula (nabla_X V - [X,V] = nabla_V X for torsion-free
  // connections); the engine and flow routes pin it.
  TensorValue out(Valence{0, 2}, n);
  for (int u = 0; u < n; ++u)
    for (int w = 0; w < n; ++w) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += g(i, w) * nframe[static_cast<size_t>(u)][i];
        acc += g(u, i) * nframe[static_cast<size_t>(w)][i];
      }
      double cart = 0.0;
      for (int m = 0; m < n; ++m) cart += nv[m] * c(m, u, w);
      out.at({u, w}) = acc + 2.0 * cart;
    }
  return out;
}

KillingReport killing_check(const VectorField& x_field, const MetricSpec& metric,
                            const std::vector<TangentSample>& samples,
                            const KillingOptions& options) {
  if (samples.empty()) throw UsageError("killing_check: empty sample set");
  SeededRng rng(options.seed);
  KillingReport report;
  report.conformal_factor.reserve(samples.size());

  bool conformal_ok = true;
  for (const auto& s : samples) {
    std::vector<VecD> dirs{s.v};
    for (int k = 0; k < options.extra_directions; ++k) {
      VecD d = rng.unit_vector(s.dim());
      if (metric.domain().contains(s.x, d)) dirs.push_back(d);
    }
    double fmin = 0.0, fmax = 0.0;
    bool first = true;
    for (const auto& d : dirs) {
      TangentSample sd(s.x, d);
      double l = evaluate_L(metric, sd);
      double lie = lie_derivative_metric(x_field, metric, sd);
      report.max_residual = std::max(report.max_residual, std::fabs(lie) / std::max(1.0, l));
      double f = lie / l;
      if (first) {
        fmin = fmax = f;
        first = false;
      } else {
        fmin = std::min(fmin, f);
        fmax = std::max(fmax, f);
      }
    }
    report.conformal_spread = std::max(report.conformal_spread, fmax - fmin);
    if (fmax - fmin > options.conformal_spread_tol) conformal_ok = false;
    report.base_points.push_back(s.x);
    report.conformal_factor.push_back(0.5 * (fmin + fmax));
  }
  report.is_killing = report.max_residual <= options.killing_tol;
  report.is_conformal = conformal_ok;
  return report;
}

VecD FlowMap::map(const VecD& x) const { return map_with_differential(x).first; }

std::pair<VecD, MatD> FlowMap::map_with_differential(const VecD& x) const {
  const int n = x_.dim();
  // state: point (n) followed by the differential (n x n, row-major)
  VecD y0(static_cast<size_t>(n) + static_cast<size_t>(n) * n, 0.0);
  std::copy(x.begin(), x.end(), y0.begin());
  for (int i = 0; i < n; ++i) y0[static_cast<size_t>(n) + static_cast<size_t>(i) * n + i] = 1.0;

  if (t_ == 0.0) {
    MatD id = MatD::identity(n);
    return {x, id};
  }

  OdeRhs rhs = [this, n](double, const VecD& y, VecD& dy) {
    VecD p(y.begin(), y.begin() + n);
    VecD xv = x_(p);
    MatD jac = x_.jacobian(p);
    dy.assign(y.size(), 0.0);
    for (int i = 0; i < n; ++i) dy[i] = xv[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
          acc += jac(i, k) * y[static_cast<size_t>(n) + static_cast<size_t>(k) * n + j];
        dy[static_cast<size_t>(n) + static_cast<size_t>(i) * n + j] = acc;
      }
  };
  OdeInside inside = [this, n](double, const VecD& y) {
    VecD p(y.begin(), y.begin() + n);
    return chart_.contains(p);
  };

  OdeOptions opts;
  opts.rel_tol = tol_;
  opts.abs_tol = tol_;
  DenseOde sol = integrate_ode(rhs, std::move(y0), 0.0, t_, opts, inside);
  if (sol.truncated())
    throw EvaluationError("FlowMap: flow left the chart before t=" + std::to_string(t_));
  VecD yt = sol.value(sol.t_end());
  VecD point(yt.begin(), yt.begin() + n);
  MatD diff(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      diff(i, j) = yt[static_cast<size_t>(n) + static_cast<size_t>(i) * n + j];
  return {point, diff};
}

namespace {

/// psi_t^* T at the sample for a (0,s) field.
TensorValue pullback_at(const VectorField& x_field, const AnisotropicTensorField& t, double time,
                        const TangentSample& sample, const ChartDomain& chart, double tol) {
  const int n = t.dim();
  const int s = t.valence().s;
  FlowMap flow(x_field, time, chart, tol);
  auto [point, diff] = flow.map_with_differential(sample.x);
  VecD pushed_v = matvec(diff, sample.v);
  TensorValue raw = t.eval<0>(point, pushed_v);
  // contract every covariant slot with the differential
  TensorValue out(t.valence(), n);
  std::vector<int> oidx(static_cast<size_t>(s), 0);
  std::vector<int> tidx(static_cast<size_t>(s), 0);
  for (size_t f = 0; f < out.c.size(); ++f) {
    size_t rem = f;
    for (int q = s - 1; q >= 0; --q) {
      oidx[static_cast<size_t>(q)] = static_cast<int>(rem % n);
      rem /= n;
    }
    double acc = 0.0;
    // sum over all index assignments of the pushed slots
    size_t combos = out.c.size() ? 1 : 0;
    combos = 1;
    for (int q = 0; q < s; ++q) combos *= static_cast<size_t>(n);
    for (size_t cidx = 0; cidx < combos; ++cidx) {
      size_t crem = cidx;
      double weight = 1.0;
      for (int q = s - 1; q >= 0; --q) {
        tidx[static_cast<size_t>(q)] = static_cast<int>(crem % n);
        crem /= n;
      }
      for (int q = 0; q < s; ++q)
        weight *= diff(tidx[static_cast<size_t>(q)], oidx[static_cast<size_t>(q)]);
      acc += weight * raw.at(tidx);
    }
    out.c[f] = acc;
  }
  return out;
}

}  // namespace

TensorValue flow_pullback_derivative(const VectorField& x_field, const AnisotropicTensorField& t,
                                     const TangentSample& sample, const ChartDomain& chart,
                                     const FlowDerivativeOptions& options) {
  if (t.valence().r != 0)
    throw UsageError("flow_pullback_derivative: only (0,s) tensor fields are supported");

  double h = options.step;
  for (;;) {
    if (h < 1e-8)
      throw EvaluationError("flow_pullback_derivative: flow step shrank below 1e-8");
    try {
      auto central = [&](double step) {
        TensorValue plus = pullback_at(x_field, t, step, sample, chart, options.flow_tol);
        TensorValue minus = pullback_at(x_field, t, -step, sample, chart, options.flow_tol);
        TensorValue out(t.valence(), t.dim());
        for (size_t q = 0; q < out.c.size(); ++q)
          out.c[q] = (plus.c[q] - minus.c[q]) / (2.0 * step);
        return out;
      };
      // Richardson table over step halvings
      std::vector<TensorValue> row;
      for (int lvl = 0; lvl <= options.richardson_levels; ++lvl)
        row.push_back(central(h / std::pow(2.0, lvl)));
      for (int lvl = 1; lvl <= options.richardson_levels; ++lvl) {
        double fac = std::pow(4.0, lvl);
        std::vector<TensorValue> next;
        for (size_t q = 0; q + 1 < row.size(); ++q) {
          TensorValue combo(t.valence(), t.dim());
          for (size_t c = 0; c < combo.c.size(); ++c)
            combo.c[c] = (fac * row[q + 1].c[c] - row[q].c[c]) / (fac - 1.0);
          next.push_back(std::move(combo));
        }
        row = std::move(next);
      }
      return row.front();
    } catch (const EvaluationError&) {
      h *= 0.5;  // flow left the chart: shrink the probing step
    }
  }
}

TensorValue flow_pullback_derivative(const VectorField& x_field, const AnisotropicTensorField& t,
                                     const TangentSample& sample,
                                     const FlowDerivativeOptions& options) {
  ChartDomain everywhere = ChartDomain::predicate(t.dim(), [](const VecD&) { return true; });
  return flow_pullback_derivative(x_field, t, sample, everywhere, options);
}

}  // namespace finsler
