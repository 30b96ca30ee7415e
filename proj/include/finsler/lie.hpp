#pragma once

#include <utility>
#include <vector>

#include "finsler/connection.hpp"
#include "finsler/curvature.hpp"

namespace finsler {

/// The Lie derivation instance of the tensor-derivation engine:
/// delta^v(Y) = [X, Y], associated field Z = X.
AnisotropicDerivation lie_derivation(const VectorField& x_field);

/// Anisotropic Lie derivative of a tensor field at a sample (constant
/// extension; the result is extension-independent).
TensorValue lie_derivative_tensor(const VectorField& x_field, const AnisotropicTensorField& t,
                                  const TangentSample& sample);
TensorValue lie_derivative_tensor(const VectorField& x_field, const AnisotropicTensorField& t,
                                  const TangentSample& sample, const ExtensionField& ext);

/// L_X(L) = 2 g_v(nabla^v_v X, v) through the Chern connection; agrees with
/// the generic engine applied to L.
double lie_derivative_metric(const VectorField& x_field, const MetricSpec& metric,
                             const TangentSample& sample);

/// L_X(g)_v(u,w) = g(nabla_u X, w) + g(u, nabla_w X) - 2 C(nabla_v X, u, w)
/// as a (0,2) tensor value.
TensorValue lie_derivative_fundamental(const VectorField& x_field, const MetricSpec& metric,
                                       const TangentSample& sample);

struct KillingOptions {
  double killing_tol = 1e-7;          // on |L_X L| / L-scale
  double conformal_spread_tol = 1e-6; // v-independence of the fitted factor
  int extra_directions = 4;           // directions probed per base point
  uint64_t seed = 0xd1f5ULL;
};

struct KillingReport {
  double max_residual = 0.0;     // max |L_X L| / max(1, |L|)
  bool is_killing = false;
  bool is_conformal = false;
  double conformal_spread = 0.0; // max over base points of the factor spread
  std::vector<VecD> base_points;
  VecD conformal_factor;         // fitted f per base point (L_X L / L)
};

/// Evaluates L_X L over the samples (augmenting each base point with extra
/// seeded directions so the v-independence of the conformal factor is
/// actually probed). Throws UsageError on an empty sample set.
KillingReport killing_check(const VectorField& x_field, const MetricSpec& metric,
                            const std::vector<TangentSample>& samples,
                            const KillingOptions& options = {});

/// Flow of a chart vector field at a fixed parameter: psi_t and its
/// differential, integrated together through the variational equation.
class FlowMap {
 public:
  FlowMap(VectorField x_field, double t, ChartDomain chart, double tol = 1e-10)
      : x_(std::move(x_field)), t_(t), chart_(std::move(chart)), tol_(tol) {}

  double parameter() const { return t_; }

  VecD map(const VecD& x) const;
  std::pair<VecD, MatD> map_with_differential(const VecD& x) const;

 private:
  VectorField x_;
  double t_ = 0.0;
  ChartDomain chart_;
  double tol_ = 1e-10;
};

struct FlowDerivativeOptions {
  double step = 1e-3;
  int richardson_levels = 2;
  double flow_tol = 1e-10;
};

/// Flow-pullback derivative of a covariant tensor field:
///   lim (psi_t^* T - T)/t,  (psi_t^* T)_v(u_1..u_s) = T_{dpsi_t v}(dpsi_t u_1, ...),
/// by Richardson-extrapolated central differences in t. Restricted to (0,s)
/// fields; serves as the independent oracle for the engine route. The probe
/// step halves (down to 1e-8) whenever the flow leaves the chart.
TensorValue flow_pullback_derivative(const VectorField& x_field, const AnisotropicTensorField& t,
                                     const TangentSample& sample, const ChartDomain& chart,
                                     const FlowDerivativeOptions& options = {});
TensorValue flow_pullback_derivative(const VectorField& x_field, const AnisotropicTensorField& t,
                                     const TangentSample& sample,
                                     const FlowDerivativeOptions& options = {});

}  // namespace finsler
