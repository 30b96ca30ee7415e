#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "finsler/chart.hpp"
#include "finsler/fields.hpp"
#include "finsler/ode.hpp"

namespace finsler {

/// A numerically integrated curve (x(t), xdot(t)) with dense output between
/// the accepted step endpoints. If integration left the chart or the conic
/// domain, the curve is truncated and flagged with the exit time.
class CurveSamples {
 public:
  CurveSamples() = default;
  CurveSamples(int dim, DenseOde sol) : dim_(dim), sol_(std::make_shared<DenseOde>(std::move(sol))) {}

  int dim() const { return dim_; }
  double t_begin() const { return sol_->t_begin(); }
  double t_end() const { return sol_->t_end(); }
  bool truncated() const { return sol_->truncated(); }
  std::optional<double> exit_time() const {
    return truncated() ? std::optional<double>(t_end()) : std::nullopt;
  }
  std::vector<double> grid() const { return sol_->grid(); }

  void require_covers(double t, const char* where) const {
    double lo = std::min(t_begin(), t_end()), hi = std::max(t_begin(), t_end());
    if (t < lo - 1e-12 || t > hi + 1e-12)
      throw UsageError(std::string(where) + ": t outside the integrated span");
  }

  VecD position(double t) const {
    require_covers(t, "CurveSamples::position");
    VecD y = sol_->value(t);
    return VecD(y.begin(), y.begin() + dim_);
  }
  VecD velocity(double t) const {
    require_covers(t, "CurveSamples::velocity");
    VecD y = sol_->value(t);
    return VecD(y.begin() + dim_, y.end());
  }
  VecD acceleration(double t) const {
    require_covers(t, "CurveSamples::acceleration");
    VecD dy = sol_->derivative(t);
    return VecD(dy.begin() + dim_, dy.end());
  }
  TangentSample sample(double t) const { return {position(t), velocity(t)}; }

 private:
  int dim_ = 0;
  std::shared_ptr<DenseOde> sol_;
};

/// Vector field along a curve, t -> X(t), with its t-derivative. The
/// derivative is exact for restrictions of chart fields and for curve
/// velocities; generic callables fall back to central differences.
struct CurveField {
  std::function<VecD(double)> value;
  std::function<VecD(double)> derivative;

  static CurveField from_function(std::function<VecD(double)> f, double h = 1e-6) {
    CurveField cf;
    cf.value = f;
    cf.derivative = [f, h](double t) {
      VecD p = f(t + h), m = f(t - h), p2 = f(t + h / 2), m2 = f(t - h / 2);
      VecD out(p.size());
      for (size_t i = 0; i < out.size(); ++i) {
        double coarse = (p[i] - m[i]) / (2 * h);
        double fine = (p2[i] - m2[i]) / h;
        out[i] = (4 * fine - coarse) / 3.0;
      }
      return out;
    };
    return cf;
  }

  /// Restriction X(gamma(t)) of a chart field; derivative dX/dx . gammadot.
  static CurveField restriction(const VectorField& field, const CurveSamples& curve) {
    CurveField cf;
    cf.value = [field, curve](double t) { return field(curve.position(t)); };
    cf.derivative = [field, curve](double t) {
      MatD j = field.jacobian(curve.position(t));
      return matvec(j, curve.velocity(t));
    };
    return cf;
  }

  static CurveField velocity_of(const CurveSamples& curve) {
    CurveField cf;
    cf.value = [curve](double t) { return curve.velocity(t); };
    cf.derivative = [curve](double t) { return curve.acceleration(t); };
    return cf;
  }
};

}  // namespace finsler
