#include "finsler/spray.hpp"

#include <cmath>

#include "finsler/sampling.hpp"

namespace finsler {

void SpraySpec::validate(int probes, uint64_t seed) const {
  auto samples = draw_samples(domain_, probes, seed);
  for (const auto& s : samples) {
    VecD g = coefficients(s);
    for (double lam : {0.5, 2.0}) {
      VecD vs = s.v;
      for (auto& c : vs) c *= lam;
      VecD gs = fns_.at<0>(s.x, vs);
      double scale = std::max(1.0, lam * lam * max_abs(g));
      for (size_t i = 0; i < g.size(); ++i)
        if (std::fabs(gs[i] - lam * lam * g[i]) > 1e-9 * scale)
          throw EvaluationError("SpraySpec: coefficients are not 2-homogeneous at x=" +
                                format_vec(s.x));
    }
  }
}

SpraySpec spray_from_metric(const MetricSpec& metric) {
  const ScalarField L = metric.lagrangian();
  return SpraySpec(metric.domain(), [L](const auto& x, const auto& v) {
    return detail::spray_coefficients_of_metric(L, x, v);
  });
}

MatD nonlinear_coefficients(const SpraySpec& spray, const TangentSample& sample) {
  spray.domain().require(sample, "nonlinear_coefficients");
  return detail::nonlinear_matrix(spray, sample.x, sample.v);
}

CurveSamples integrate_geodesic(const SpraySpec& spray, const VecD& x0, const VecD& v0,
                                std::pair<double, double> t_span, double tol) {
  const int n = spray.dim();
  TangentSample start(x0, v0);
  spray.domain().require(start, "integrate_geodesic");

  OdeRhs rhs = [&spray, n](double, const VecD& y, VecD& dy) {
    VecD x(y.begin(), y.begin() + n);
    VecD v(y.begin() + n, y.end());
    VecD g = spray.coefficients<0>(x, v);
    dy.resize(2 * static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      dy[i] = v[i];
      dy[n + i] = -g[i];
    }
  };
  OdeInside inside = [&spray, n](double, const VecD& y) {
    VecD x(y.begin(), y.begin() + n);
    VecD v(y.begin() + n, y.end());
    return spray.domain().contains(x, v);
  };

  VecD y0(2 * static_cast<size_t>(n));
  std::copy(x0.begin(), x0.end(), y0.begin());
  std::copy(v0.begin(), v0.end(), y0.begin() + n);

  OdeOptions opts;
  // Differentiating the dense output costs roughly (local tol)/h accuracy,
  // so the midpoint residual contract |xddot + G| <= 10 tol needs the
  // integration itself to run about four orders tighter than asked.
  opts.rel_tol = std::max(5e-14, tol * 1e-4);
  opts.abs_tol = opts.rel_tol;
  opts.max_step = std::fabs(t_span.second - t_span.first) / 16.0;
  DenseOde sol = integrate_ode(rhs, std::move(y0), t_span.first, t_span.second, opts, inside);
  return CurveSamples(n, std::move(sol));
}

VecD nonlinear_covariant_derivative(const SpraySpec& spray, const CurveSamples& curve,
                                    const CurveField& field, double t) {
  const int n = spray.dim();
  VecD xv = field.value(t);
  VecD x = curve.position(t);
  if (!spray.domain().contains(x, xv))
    throw AdmissibilityError("nonlinear_covariant_derivative: X(t) outside the cone at t=" +
                             std::to_string(t));
  MatD nmat = detail::nonlinear_matrix(spray, x, xv);
  VecD xdot = field.derivative(t);
  VecD adot = curve.velocity(t);
  VecD out(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double acc = xdot[j];
    for (int i = 0; i < n; ++i) acc += nmat(j, i) * adot[i];
    out[j] = acc;
  }
  return out;
}

double geodesic_residual(const SpraySpec& spray, const CurveSamples& curve) {
  // Residual in the integrator's own absolute/relative sense:
  // |xddot_i + G_i| / (1 + |G_i|) at every step midpoint.
  double worst = 0.0;
  auto grid = curve.grid();
  for (size_t k = 0; k + 1 < grid.size(); ++k) {
    double tm = 0.5 * (grid[k] + grid[k + 1]);
    VecD x = curve.position(tm), v = curve.velocity(tm), a = curve.acceleration(tm);
    if (!spray.domain().contains(x, v)) continue;
    VecD g = spray.coefficients<0>(x, v);
    for (size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::fabs(a[i] + g[i]) / (1.0 + std::fabs(g[i])));
  }
  return worst;
}

}  // namespace finsler
