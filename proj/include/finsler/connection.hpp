#pragma once

#include <utility>

#include "finsler/curve.hpp"
#include "finsler/derivation.hpp"
#include "finsler/spray.hpp"
#include "finsler/tensor_field.hpp"

namespace finsler {

namespace detail {

/// Berwald symbols of a spray: G^i_jk = 1/2 d^2 G^i / dy^j dy^k,
/// flat layout (i*n + j)*n + k with j,k the two lower slots.
template <class S>
Vec<S> berwald_symbols(const SpraySpec& spray, const Vec<S>& x, const Vec<S>& v) {
  const int n = static_cast<int>(x.size());
  constexpr int K2 = level_of<S> + 2;
  Vec<S> out(static_cast<size_t>(n) * n * n);
  auto idx = [n](int i, int j, int k) { return (static_cast<size_t>(i) * n + j) * n + k; };
  auto x2 = promote_const(promote_const(x));
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      VecD ej(static_cast<size_t>(n), 0.0), ek(static_cast<size_t>(n), 0.0);
      ej[static_cast<size_t>(j)] = 1.0;
      ek[static_cast<size_t>(k)] = 1.0;
      auto v2 = promote(promote(v, ej), ek);
      Vec<Dual<Dual<S>>> g = spray.coefficients<K2>(x2, v2);
      for (int i = 0; i < n; ++i) {
        S val = S{0.5} * g[static_cast<size_t>(i)].b.b;
        out[idx(i, j, k)] = val;
        out[idx(i, k, j)] = val;
      }
    }
  return out;
}

/// Chern symbols of a metric through the horizontal Koszul formula
///   G^i_jk = 1/2 g^{is} (delta_j g_sk + delta_k g_sj - delta_s g_jk),
/// delta_j = d/dx^j - N^m_j d/dy^m. Validated against the torsion-free +
/// nabla g = 0 characterization by the test suite rather than trusted.
template <class S>
Vec<S> chern_symbols(const ScalarField& L, const Vec<S>& x, const Vec<S>& v) {
  const int n = static_cast<int>(x.size());
  Mat<S> g = metric_tensor(L, x, v);
  Mat<S> ginv = inverse(g);
  Vec<S> cartan = cartan_tensor_flat(L, x, v);

  // dgdx[j](s,k) = d g_sk / dx^j
  std::vector<Mat<S>> dgdx(static_cast<size_t>(n));
  constexpr int K3 = level_of<S> + 3;
  for (int j = 0; j < n; ++j) {
    dgdx[static_cast<size_t>(j)] = Mat<S>(n);
    VecD ej(static_cast<size_t>(n), 0.0);
    ej[static_cast<size_t>(j)] = 1.0;
    for (int s = 0; s < n; ++s)
      for (int k = s; k < n; ++k) {
        VecD es(static_cast<size_t>(n), 0.0), ek(static_cast<size_t>(n), 0.0);
        es[static_cast<size_t>(s)] = 1.0;
        ek[static_cast<size_t>(k)] = 1.0;
        auto x3 = promote(promote_const(promote_const(x)), promote_const(promote_const(ej)));
        auto v3 = promote_const(promote(promote(v, es), ek));
        S val = S{0.5} * L.template eval<K3>(x3, v3).b.b.b;
        dgdx[static_cast<size_t>(j)](s, k) = val;
        dgdx[static_cast<size_t>(j)](k, s) = val;
      }
  }

  // nonlinear coefficients from the metric's own spray
  Mat<S> nmat(n);
  {
    auto x1 = promote_const(x);
    for (int j = 0; j < n; ++j) {
      VecD ej(static_cast<size_t>(n), 0.0);
      ej[static_cast<size_t>(j)] = 1.0;
      Vec<Dual<S>> gc = spray_coefficients_of_metric(L, x1, promote(v, ej));
      for (int i = 0; i < n; ++i) nmat(i, j) = S{0.5} * gc[static_cast<size_t>(i)].b;
    }
  }

  auto cidx = [n](int i, int j, int k) { return (static_cast<size_t>(i) * n + j) * n + k; };
  auto delta_g = [&](int j, int s, int k) {
    S acc = dgdx[static_cast<size_t>(j)](s, k);
    for (int m = 0; m < n; ++m) acc -= nmat(m, j) * S{2.0} * cartan[cidx(m, s, k)];
    return acc;
  };

  Vec<S> out(static_cast<size_t>(n) * n * n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      Vec<S> koszul(static_cast<size_t>(n));
      for (int s = 0; s < n; ++s)
        koszul[static_cast<size_t>(s)] = delta_g(j, s, k) + delta_g(k, s, j) - delta_g(s, j, k);
      for (int i = 0; i < n; ++i) {
        S acc{};
        for (int s = 0; s < n; ++s) acc += ginv(i, s) * koszul[static_cast<size_t>(s)];
        S val = S{0.5} * acc;
        out[cidx(i, j, k)] = val;
        out[cidx(i, k, j)] = val;
      }
    }
  return out;
}

}  // namespace detail

/// Direction-dependent affine connection on the chart, given by Christoffel
/// symbol functions G^i_jk(x, v) (flat layout (i*n+j)*n+k; j is the
/// derivative-direction slot, k the argument slot).
class AnisotropicConnection {
 public:
  AnisotropicConnection() = default;
  template <class F>
  AnisotropicConnection(ConicDomain domain, F christoffel_fn, bool torsion_free,
                        std::string name = "connection")
      : domain_(std::move(domain)),
        torsion_free_(torsion_free),
        name_(std::move(name)),
        fns_(std::move(christoffel_fn)) {}

  int dim() const { return domain_.dim(); }
  const ConicDomain& domain() const { return domain_; }
  bool torsion_free() const { return torsion_free_; }
  const std::string& name() const { return name_; }

  template <int K>
  Vec<DualLevel<K>> christoffel(const Vec<DualLevel<K>>& x, const Vec<DualLevel<K>>& v) const {
    return fns_.template at<K>(x, v);
  }
  VecD christoffel(const TangentSample& s) const {
    domain_.require(s, "AnisotropicConnection::christoffel");
    return fns_.at<0>(s.x, s.v);
  }

  double symbol(const VecD& flat, int i, int j, int k) const {
    const int n = dim();
    return flat[(static_cast<size_t>(i) * n + j) * n + k];
  }

  /// Checks the torsion-free claim (symbol symmetry, tol 1e-10) on seeded
  /// samples; throws on violation.
  void validate(int probes = 20, uint64_t seed = 0x5eedULL) const;

 private:
  ConicDomain domain_;
  bool torsion_free_ = false;
  std::string name_;
  detail::Leveled<detail::VecXVSig, kConnectionLevels> fns_;
};

/// Natural connection of a spray: symbols d N^k_i / dy^j = 1/2 d^2 G^k / dy^i dy^j.
AnisotropicConnection berwald_connection(const SpraySpec& spray);

/// The torsion-free metric-compatible connection of a pseudo-Finsler metric.
AnisotropicConnection chern_connection(const MetricSpec& metric);

/// (nabla^v_X Y)^i = X^j dY^i/dx^j + X^j Y^k G^i_jk(x, v).
VecD covariant_derivative_vector(const AnisotropicConnection& conn, const TangentSample& sample,
                                 const VectorField& x_field, const VectorField& y_field);

/// The derivation engine instance of nabla_X: Z = X, delta^v = nabla^v_X.
AnisotropicDerivation covariant_derivation(const AnisotropicConnection& conn,
                                           const VectorField& x_field);

/// Covariant derivative of an arbitrary tensor field along X at a sample,
/// evaluated through the tensor derivation engine with the given extension
/// (constant extension when omitted). Extension-independent.
TensorValue covariant_derivative_tensor(const AnisotropicConnection& conn,
                                        const VectorField& x_field,
                                        const AnisotropicTensorField& t,
                                        const TangentSample& sample);
TensorValue covariant_derivative_tensor(const AnisotropicConnection& conn,
                                        const VectorField& x_field,
                                        const AnisotropicTensorField& t,
                                        const TangentSample& sample, const ExtensionField& ext);

/// D^v_gamma X = Xdot^k + X^i gammadot^j G^k_ji(v); the reference direction
/// v must sit over the curve point at time t.
VecD covariant_derivative_along_curve(const AnisotropicConnection& conn, const CurveSamples& curve,
                                      const CurveField& field, double t, const TangentSample& v);

/// Geodesics of the connection: gammaddot^k + gammadot^i gammadot^j G^k_ij(gammadot) = 0.
CurveSamples connection_geodesic(const AnisotropicConnection& conn, const VecD& x0, const VecD& v0,
                                 std::pair<double, double> t_span, double tol = 1e-9);

/// Max dense-output residual of the connection geodesic equation.
double connection_geodesic_residual(const AnisotropicConnection& conn, const CurveSamples& curve);

/// Difference tensor of two connections at a sample: a (1,2) tensor value
/// with components G1^i_jk - G2^i_jk.
TensorValue difference_tensor(const AnisotropicConnection& conn1,
                              const AnisotropicConnection& conn2, const TangentSample& sample);

/// The same difference as an anisotropic tensor field (for vertical
/// derivation tests).
AnisotropicTensorField difference_tensor_field(const AnisotropicConnection& conn1,
                                               const AnisotropicConnection& conn2);

}  // namespace finsler
