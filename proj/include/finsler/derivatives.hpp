#pragma once

#include <cmath>
#include <span>

#include "finsler/chart.hpp"
#include "finsler/fields.hpp"

namespace finsler {

/// Promote an S-valued vector one dual level, seeding the new derivative
/// slot with `seed` (the direction of differentiation). The seed may be
/// S-valued or plain double.
template <class S, class U>
Vec<Dual<S>> promote(const Vec<S>& base, const Vec<U>& seed) {
  Vec<Dual<S>> out(base.size());
  for (size_t i = 0; i < base.size(); ++i) out[i] = Dual<S>{base[i], S{seed[i]}};
  return out;
}

template <class S>
Vec<Dual<S>> promote_const(const Vec<S>& base) {
  Vec<Dual<S>> out(base.size());
  for (size_t i = 0; i < base.size(); ++i) out[i] = Dual<S>{base[i], S{}};
  return out;
}

namespace detail {

/// d/dt f(x + t dx, v + t dv)|_0 with S-valued seeds (one extra level).
template <class S>
S dir_derivative(const ScalarField& f, const Vec<S>& x, const Vec<S>& v, const Vec<S>& dx,
                 const Vec<S>& dv) {
  constexpr int K = level_of<S> + 1;
  return f.eval<K>(promote(x, dx), promote(v, dv)).b;
}

/// Second fiber partial d^2 f / dy^i dy^j at (x, v), staying S-valued.
template <class S>
S fiber_partial2(const ScalarField& f, const Vec<S>& x, const Vec<S>& v, int i, int j) {
  constexpr int K = level_of<S> + 2;
  const int n = static_cast<int>(x.size());
  VecD ei(n, 0.0), ej(n, 0.0);
  ei[i] = 1.0;
  ej[j] = 1.0;
  auto x2 = promote_const(promote_const(x));
  auto v2 = promote(promote(v, ei), ej);
  return f.eval<K>(x2, v2).b.b;
}

/// Third fiber partial d^3 f / dy^i dy^j dy^k.
template <class S>
S fiber_partial3(const ScalarField& f, const Vec<S>& x, const Vec<S>& v, int i, int j, int k) {
  constexpr int K = level_of<S> + 3;
  const int n = static_cast<int>(x.size());
  VecD ei(n, 0.0), ej(n, 0.0), ek(n, 0.0);
  ei[i] = 1.0;
  ej[j] = 1.0;
  ek[k] = 1.0;
  auto x3 = promote_const(promote_const(promote_const(x)));
  auto v3 = promote(promote(promote(v, ei), ej), ek);
  return f.eval<K>(x3, v3).b.b.b;
}

/// First base partial d f / dx^p holding v fixed.
template <class S>
S base_partial(const ScalarField& f, const Vec<S>& x, const Vec<S>& v, int p) {
  constexpr int K = level_of<S> + 1;
  const int n = static_cast<int>(x.size());
  VecD ep(n, 0.0);
  ep[p] = 1.0;
  return f.eval<K>(promote(x, ep), promote_const(v)).b;
}

}  // namespace detail

/// Mixed fiber derivative of order 1..3 along the given directions:
/// d^k/dt_1..dt_k f(x, v + sum t_i z_i) at t = 0.
inline double fiber_derivative(const ScalarField& f, const TangentSample& sample,
                               std::span<const VecD> directions) {
  const size_t order = directions.size();
  if (order < 1 || order > 3) throw UsageError("fiber_derivative: order must be 1, 2 or 3");
  if (f.smoothness_order() < static_cast<int>(order))
    throw UsageError("fiber_derivative: field does not declare enough smoothness");
  for (const auto& z : directions)
    if (norm2(z) < kMinDirectionNorm) throw UsageError("fiber_derivative: zero direction");
  double out = 0.0;
  if (order == 1) {
    out = f.eval<1>(promote_const(sample.x), promote(sample.v, directions[0])).b;
  } else if (order == 2) {
    auto x2 = promote_const(promote_const(sample.x));
    auto v2 = promote(promote(sample.v, directions[0]), directions[1]);
    out = top_mixed(f.eval<2>(x2, v2));
  } else {
    auto x3 = promote_const(promote_const(promote_const(sample.x)));
    auto v3 = promote(promote(promote(sample.v, directions[0]), directions[1]), directions[2]);
    out = top_mixed(f.eval<3>(x3, v3));
  }
  if (!std::isfinite(out))
    throw EvaluationError("fiber_derivative: non-finite value at x=" + format_vec(sample.x));
  return out;
}

inline double fiber_derivative(const ScalarField& f, const ConicDomain& domain,
                               const TangentSample& sample, std::span<const VecD> directions) {
  domain.require(sample, "fiber_derivative");
  return fiber_derivative(f, sample, directions);
}

/// First base derivative d/dt f(x + t u, v)|_0.
inline double base_derivative(const ScalarField& f, const TangentSample& sample, const VecD& u) {
  if (norm2(u) < kMinDirectionNorm) throw UsageError("base_derivative: zero direction");
  double out = f.eval<1>(promote(sample.x, u), promote_const(sample.v)).b;
  if (!std::isfinite(out))
    throw EvaluationError("base_derivative: non-finite value at x=" + format_vec(sample.x));
  return out;
}

inline double base_derivative(const ScalarField& f, const ConicDomain& domain,
                              const TangentSample& sample, const VecD& u) {
  domain.require(sample, "base_derivative");
  return base_derivative(f, sample, u);
}

}  // namespace finsler
