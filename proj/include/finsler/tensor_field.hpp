#pragma once

#include <utility>

#include "finsler/derivatives.hpp"
#include "finsler/fields.hpp"
#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

namespace detail {
template <int K>
struct TensorXVSig {
  using S = DualLevel<K>;
  using type = TensorValueT<S>(const Vec<S>&, const Vec<S>&);
};
}  // namespace detail

/// Anisotropic (r,s)-tensor field: a component-array-valued function of
/// (x, v), evaluatable at dual levels up to kTensorFieldLevels so that the
/// derivation engine and the vertical derivation can differentiate it.
class AnisotropicTensorField {
 public:
  AnisotropicTensorField() = default;

  template <class F>
  AnisotropicTensorField(Valence val, int dim, F f, int smoothness = kSmoothEverywhere)
      : valence_(val), dim_(dim), smooth_(smoothness), fns_(std::move(f)) {}

  template <int K>
  TensorValueT<DualLevel<K>> eval(const Vec<DualLevel<K>>& x, const Vec<DualLevel<K>>& v) const {
    return fns_.template at<K>(x, v);
  }
  TensorValue operator()(const TangentSample& s) const { return fns_.at<0>(s.x, s.v); }

  Valence valence() const { return valence_; }
  int dim() const { return dim_; }
  int smoothness_order() const { return smooth_; }
  explicit operator bool() const { return static_cast<bool>(fns_); }

  /// Lift of a classical (v-independent) tensor given by a generic
  /// component functor x -> TensorValueT<S>.
  template <class F>
  static AnisotropicTensorField lift_classical(Valence val, int dim, F f) {
    return {val, dim, [f](const auto& x, const auto& v) {
              (void)v;
              return f(x);
            }};
  }

  static AnisotropicTensorField lift_vector_field(const VectorField& X) {
    const int n = X.dim();
    return {Valence{1, 0}, n, [X, n](const auto& x, const auto& v) {
              using S = std::decay_t<decltype(x[0])>;
              (void)v;
              constexpr int K = level_of<S>;
              TensorValueT<S> t(Valence{1, 0}, n);
              t.c = X.template eval<K>(x);
              return t;
            }};
  }

  static AnisotropicTensorField from_scalar(const ScalarField& f) {
    const int n = f.dim();
    return {Valence{0, 0}, n,
            [f, n](const auto& x, const auto& v) {
              using S = std::decay_t<decltype(x[0])>;
              constexpr int K = level_of<S>;
              return TensorValueT<S>::scalar(n, f.template eval<K>(x, v));
            },
            f.smoothness_order()};
  }

  /// Constant coordinate one-form dx^i.
  static AnisotropicTensorField coordinate_one_form(int dim, int i) {
    return {Valence{0, 1}, dim, [dim, i](const auto& x, const auto& v) {
              using S = std::decay_t<decltype(x[0])>;
              (void)x;
              (void)v;
              TensorValueT<S> t(Valence{0, 1}, dim);
              t.c[static_cast<size_t>(i)] = S{1.0};
              return t;
            }};
  }

 private:
  Valence valence_{};
  int dim_ = 0;
  int smooth_ = 0;
  detail::Leveled<detail::TensorXVSig, kTensorFieldLevels> fns_;
};

/// Vertical derivation: (d^nu T)_v(z, ...) = d/dt T_{v+tz}(...)|_0.
/// Componentwise d/dy^k of the components; the new index is prepended as
/// covariant slot 0 (see the index conventions in the README).
inline AnisotropicTensorField vertical_derivation(const AnisotropicTensorField& t) {
  if (t.smoothness_order() < 1)
    throw UsageError("vertical_derivation: field is not differentiable in the fiber");
  const Valence out_val{t.valence().r, t.valence().s + 1};
  const int n = t.dim();
  return {out_val, n,
          [t, out_val, n](const auto& x, const auto& v) -> TensorValueT<std::decay_t<decltype(x[0])>> {
            using S = std::decay_t<decltype(x[0])>;
            constexpr int K = level_of<S>;
            if constexpr (K + 1 > kTensorFieldLevels) {
              throw EvaluationError("vertical_derivation: nesting depth exhausted");
            } else {
              const int r = out_val.r;
              TensorValueT<S> out(out_val, n);
              auto xx = promote_const(x);
              for (int k = 0; k < n; ++k) {
                VecD ek(static_cast<size_t>(n), 0.0);
                ek[static_cast<size_t>(k)] = 1.0;
                TensorValueT<Dual<S>> dt = t.template eval<K + 1>(xx, promote(v, ek));
                // scatter d/dy^k into covariant slot 0 (position r in the index list)
                std::vector<int> oidx(static_cast<size_t>(out_val.total()), 0);
                std::vector<int> tidx(static_cast<size_t>(t.valence().total()), 0);
                for (size_t f = 0; f < dt.c.size(); ++f) {
                  size_t rem = f;
                  for (int q = t.valence().total() - 1; q >= 0; --q) {
                    tidx[static_cast<size_t>(q)] = static_cast<int>(rem % n);
                    rem /= n;
                  }
                  for (int q = 0; q < r; ++q) oidx[static_cast<size_t>(q)] = tidx[static_cast<size_t>(q)];
                  oidx[static_cast<size_t>(r)] = k;
                  for (int q = r; q < t.valence().total(); ++q)
                    oidx[static_cast<size_t>(q) + 1] = tidx[static_cast<size_t>(q)];
                  out.at(oidx) = dt.c[f].b;
                }
              }
              return out;
            }
          },
          t.smoothness_order() - 1};
}

inline AnisotropicTensorField tensor_product(const AnisotropicTensorField& t1,
                                             const AnisotropicTensorField& t2) {
  if (t1.dim() != t2.dim()) throw UsageError("tensor_product: dimension mismatch");
  Valence val{t1.valence().r + t2.valence().r, t1.valence().s + t2.valence().s};
  return {val, t1.dim(),
          [t1, t2](const auto& x, const auto& v) {
            using S = std::decay_t<decltype(x[0])>;
            constexpr int K = level_of<S>;
            return tensor_product(t1.template eval<K>(x, v), t2.template eval<K>(x, v));
          },
          std::min(t1.smoothness_order(), t2.smoothness_order())};
}

inline AnisotropicTensorField contract(const AnisotropicTensorField& t, int i, int j) {
  if (t.valence().r < 1 || t.valence().s < 1 || i < 0 || i >= t.valence().r || j < 0 ||
      j >= t.valence().s)
    throw UsageError("contract: slot out of range");
  Valence val{t.valence().r - 1, t.valence().s - 1};
  return {val, t.dim(),
          [t, i, j](const auto& x, const auto& v) {
            using S = std::decay_t<decltype(x[0])>;
            constexpr int K = level_of<S>;
            return contract(t.template eval<K>(x, v), i, j);
          },
          t.smoothness_order()};
}

/// Fundamental tensor as a (0,2) anisotropic field.
inline AnisotropicTensorField fundamental_tensor_field(const MetricSpec& metric) {
  const int n = metric.dim();
  const ScalarField L = metric.lagrangian();
  return {Valence{0, 2}, n, [L, n](const auto& x, const auto& v) {
            using S = std::decay_t<decltype(x[0])>;
            Mat<S> g = detail::metric_tensor(L, x, v);
            TensorValueT<S> t(Valence{0, 2}, n);
            t.c = std::move(g.a);
            return t;
          }};
}

/// Inverse fundamental tensor as a (2,0) anisotropic field.
inline AnisotropicTensorField inverse_fundamental_tensor_field(const MetricSpec& metric) {
  const int n = metric.dim();
  const ScalarField L = metric.lagrangian();
  return {Valence{2, 0}, n, [L, n](const auto& x, const auto& v) {
            using S = std::decay_t<decltype(x[0])>;
            Mat<S> g = detail::metric_tensor(L, x, v);
            TensorValueT<S> t(Valence{2, 0}, n);
            t.c = inverse(g).a;
            return t;
          }};
}

/// Cartan tensor as a (0,3) anisotropic field.
inline AnisotropicTensorField cartan_tensor_field(const MetricSpec& metric) {
  const int n = metric.dim();
  const ScalarField L = metric.lagrangian();
  return {Valence{0, 3}, n, [L, n](const auto& x, const auto& v) {
            using S = std::decay_t<decltype(x[0])>;
            TensorValueT<S> t(Valence{0, 3}, n);
            t.c = detail::cartan_tensor_flat(L, x, v);
            return t;
          }};
}

}  // namespace finsler
