#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

using OdeRhs = std::function<void(double t, const VecD& y, VecD& dydt)>;
using OdeInside = std::function<bool(double t, const VecD& y)>;

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double initial_step = 0.0;  // 0 = automatic
  double max_step = 0.0;      // 0 = unbounded
  long max_steps = 2000000;
};

/// One accepted step with the five dense-output registers of the
/// Dormand-Prince 5(4) interpolant (locally order-4 accurate).
struct OdeStep {
  double t0 = 0.0, t1 = 0.0;
  VecD rcont1, rcont2, rcont3, rcont4, rcont5;
};

/// Dense solution of an ODE on [t_begin, t_end] (t may run backwards).
/// `value` and `derivative` evaluate the continuous extension at any t
/// inside the covered span.
class DenseOde {
 public:
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  bool truncated() const { return truncated_; }
  const std::vector<OdeStep>& steps() const { return steps_; }

  VecD value(double t) const;
  VecD derivative(double t) const;
  std::vector<double> grid() const;

 private:
  friend DenseOde integrate_ode(const OdeRhs&, VecD, double, double, const OdeOptions&,
                                const OdeInside&);
  std::vector<OdeStep> steps_;
  double t_begin_ = 0.0, t_end_ = 0.0;
  bool truncated_ = false;
};

/// Adaptive explicit Runge-Kutta 5(4) with dense output. When `inside` is
/// given and the solution leaves the admissible set, the exit time is
/// bisected to 1e-10 on the dense output and the result is truncated there.
DenseOde integrate_ode(const OdeRhs& rhs, VecD y0, double t0, double t1, const OdeOptions& options,
                       const OdeInside& inside = nullptr);

}  // namespace finsler
