#pragma once

#include <utility>

#include "finsler/curve.hpp"
#include "finsler/derivatives.hpp"
#include "finsler/metric.hpp"

namespace finsler {

namespace detail {

/// Spray coefficients of a metric (the geodesic equation reads
/// xddot^i = -G^i(x, xdot)): G^i = g^{is} ( 1/2 y^k d2L/dx^k dy^s - 1/2 dL/dx^s ).
template <class S>
Vec<S> spray_coefficients_of_metric(const ScalarField& L, const Vec<S>& x, const Vec<S>& v) {
  const int n = static_cast<int>(x.size());
  Mat<S> g = metric_tensor(L, x, v);
  Mat<S> ginv = inverse(g);
  Vec<S> rhs(static_cast<size_t>(n));
  constexpr int K2 = level_of<S> + 2;
  for (int s = 0; s < n; ++s) {
    VecD es(static_cast<size_t>(n), 0.0);
    es[static_cast<size_t>(s)] = 1.0;
    // inner level: fiber seed e_s; outer level: base seed along v itself
    auto x1 = promote_const(x);
    auto v1 = promote(v, es);
    auto x2 = promote(x1, promote_const(v));
    auto v2 = promote_const(v1);
    S mixed = L.template eval<K2>(x2, v2).b.b;
    rhs[static_cast<size_t>(s)] = S{0.5} * mixed - S{0.5} * base_partial(L, x, v, s);
  }
  return matvec(ginv, rhs);
}

}  // namespace detail

/// A spray over a conic domain: 2-homogeneous coefficient functions G^i(x,v)
/// evaluatable at dual levels (the Berwald tower differentiates G three
/// times in the fiber).
class SpraySpec {
 public:
  SpraySpec() = default;
  template <class F>
  SpraySpec(ConicDomain domain, F g_fn) : domain_(std::move(domain)), fns_(std::move(g_fn)) {}

  int dim() const { return domain_.dim(); }
  const ConicDomain& domain() const { return domain_; }

  template <int K>
  Vec<DualLevel<K>> coefficients(const Vec<DualLevel<K>>& x, const Vec<DualLevel<K>>& v) const {
    return fns_.template at<K>(x, v);
  }
  VecD coefficients(const TangentSample& s) const {
    domain_.require(s, "SpraySpec::coefficients");
    return fns_.at<0>(s.x, s.v);
  }

  /// Probes 2-homogeneity G(x, l v) = l^2 G(x, v) on seeded samples.
  void validate(int probes = 20, uint64_t seed = 0x5eedULL) const;

 private:
  ConicDomain domain_;
  detail::Leveled<detail::VecXVSig, kSprayLevels> fns_;
};

/// The spray determined by a pseudo-Finsler metric.
SpraySpec spray_from_metric(const MetricSpec& metric);

namespace detail {

/// N^i_j = 1/2 dG^i/dy^j at the caller's scalar level.
template <class S>
Mat<S> nonlinear_matrix(const SpraySpec& spray, const Vec<S>& x, const Vec<S>& v) {
  const int n = static_cast<int>(x.size());
  constexpr int K1 = level_of<S> + 1;
  Mat<S> nmat(n);
  auto x1 = promote_const(x);
  for (int j = 0; j < n; ++j) {
    VecD ej(static_cast<size_t>(n), 0.0);
    ej[static_cast<size_t>(j)] = 1.0;
    Vec<Dual<S>> g = spray.coefficients<K1>(x1, promote(v, ej));
    for (int i = 0; i < n; ++i) nmat(i, j) = S{0.5} * g[static_cast<size_t>(i)].b;
  }
  return nmat;
}

}  // namespace detail

/// Nonlinear connection coefficients N^i_j(x, v) of a spray.
MatD nonlinear_coefficients(const SpraySpec& spray, const TangentSample& sample);

/// Integrates xddot = -G(x, xdot) from (x0, v0) over t_span. The returned
/// curve is truncated (and flagged) if it leaves the chart or the cone; the
/// dense-output residual |xddot + G| at step midpoints stays below 10*tol.
CurveSamples integrate_geodesic(const SpraySpec& spray, const VecD& x0, const VecD& v0,
                                std::pair<double, double> t_span, double tol = 1e-9);

/// Nonlinear covariant derivative of a field X(t) along a curve:
/// (D_alpha X)^j = Xdot^j + N^j_i(x(t), X(t)) alphadot^i. X(t) must stay in
/// the admissible cone; otherwise AdmissibilityError.
VecD nonlinear_covariant_derivative(const SpraySpec& spray, const CurveSamples& curve,
                                    const CurveField& field, double t);

/// Max dense-output residual |xddot + G(x, xdot)| over all step midpoints.
double geodesic_residual(const SpraySpec& spray, const CurveSamples& curve);

}  // namespace finsler
