#pragma once

#include <utility>

#include "finsler/connection.hpp"

namespace finsler {

/// Vertical derivative of a connection at a sample: a (1,3) tensor with
/// components P^l_{ijk} = d G^l_ij / dy^k, slots (output; u, w, vertical z).
struct VerticalDerivValue {
  TensorValue p;
  VecD apply(const VecD& u, const VecD& w, const VecD& z) const {
    const int n = p.n;
    VecD out(static_cast<size_t>(n), 0.0);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) out[l] += p.at({l, i, j, k}) * u[i] * w[j] * z[k];
    return out;
  }
};

/// Curvature tensor value R_v at a sample: a (1,3) tensor with slot order
/// (output; u, w, z) for R_v(u, w)z. Antisymmetric in (u, w).
struct CurvatureValue {
  TensorValue r;
  VecD apply(const VecD& u, const VecD& w, const VecD& z) const {
    const int n = r.n;
    VecD out(static_cast<size_t>(n), 0.0);
    for (int k = 0; k < n; ++k)
      for (int p0 = 0; p0 < n; ++p0)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) out[k] += r.at({k, p0, j, i}) * u[p0] * w[j] * z[i];
    return out;
  }
};

/// P^l_{ijk} = d G^l_ij / dy^k.
VerticalDerivValue vertical_derivative_connection(const AnisotropicConnection& conn,
                                                  const TangentSample& sample);

/// Affine curvature R^V of the affine connection induced by an extension V:
/// depends on the extension by design (the correction terms of the curvature
/// tensor exist to cancel exactly that dependence).
VecD affine_curvature(const AnisotropicConnection& conn, const ExtensionField& ext,
                      const TangentSample& sample, const VecD& u, const VecD& w, const VecD& z);

/// Extension-independent curvature tensor, assembled at symbol level (base
/// and fiber derivatives of the Christoffel symbols, constant extension).
CurvatureValue curvature_tensor(const AnisotropicConnection& conn, const TangentSample& sample);
VecD curvature_tensor(const AnisotropicConnection& conn, const TangentSample& sample,
                      const VecD& u, const VecD& w, const VecD& z);

/// Operator-level route: R^V(u,w)z - P_V(w,z,nabla^V_u V) + P_V(u,z,nabla^V_w V)
/// with an explicit extension. Kept as the independent oracle for the
/// symbol-level assembly.
VecD curvature_tensor_operator_route(const AnisotropicConnection& conn, const ExtensionField& ext,
                                     const TangentSample& sample, const VecD& u, const VecD& w,
                                     const VecD& z);

/// Berwald tensor of a spray: B^l_{ijk} = 1/2 d^3 G^l / dy^i dy^j dy^k
/// (the vertical derivative of the Berwald connection; totally symmetric).
VerticalDerivValue berwald_tensor(const SpraySpec& spray, const TangentSample& sample);

/// Landsberg tensor of a metric: L_v(u,w,z) = g_v(B_v(u,w,z), v).
double landsberg_tensor(const MetricSpec& metric, const TangentSample& sample, const VecD& u,
                        const VecD& w, const VecD& z);

/// All Landsberg components as a (0,3) tensor value.
TensorValue landsberg_tensor_full(const MetricSpec& metric, const TangentSample& sample);

/// Scaled residual of P_v(v,v,.) = 0, the precondition of the Jacobi
/// equation; connections of sprays and metrics satisfy it.
double vertical_property_residual(const AnisotropicConnection& conn, const TangentSample& sample);

inline constexpr double kVerticalPropertyTolerance = 1e-7;

/// R_gamma(u) = R_{gammadot}(gammadot, u) gammadot at curve time t. Checks
/// the vertical property at (x(t), xdot(t)) first; PreconditionError (naming
/// the residual) if violated.
VecD curvature_operator(const AnisotropicConnection& conn, const CurveSamples& geodesic, double t,
                        const VecD& u);

/// Jacobi field along a geodesic: (J(t), U(t)) with U = D_gamma J.
class JacobiField {
 public:
  JacobiField() = default;
  JacobiField(int dim, DenseOde sol)
      : dim_(dim), sol_(std::make_shared<DenseOde>(std::move(sol))) {}

  int dim() const { return dim_; }
  double t_begin() const { return sol_->t_begin(); }
  double t_end() const { return sol_->t_end(); }
  std::vector<double> grid() const { return sol_->grid(); }

  VecD value(double t) const {
    VecD y = sol_->value(t);
    return VecD(y.begin(), y.begin() + dim_);
  }
  VecD derivative(double t) const {
    VecD dy = sol_->derivative(t);
    return VecD(dy.begin(), dy.begin() + dim_);
  }
  VecD covariant_derivative(double t) const {
    VecD y = sol_->value(t);
    return VecD(y.begin() + dim_, y.end());
  }
  const DenseOde& dense() const { return *sol_; }

 private:
  int dim_ = 0;
  std::shared_ptr<DenseOde> sol_;
};

/// Integrates the Jacobi equation (D_gamma)^2 J = R_gamma(J) along a
/// geodesic of the connection, with J(t0) = j0 and plain derivative
/// dJ/dt(t0) = j0_dot.
JacobiField integrate_jacobi(const AnisotropicConnection& conn, const CurveSamples& geodesic,
                             const VecD& j0, const VecD& j0_dot, std::pair<double, double> t_span,
                             double tol = 1e-9);

/// Max dense-output residual of the first-order Jacobi system at midpoints.
double jacobi_residual(const AnisotropicConnection& conn, const CurveSamples& geodesic,
                       const JacobiField& field);

}  // namespace finsler
