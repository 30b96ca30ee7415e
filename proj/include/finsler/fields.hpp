#pragma once

#include <functional>
#include <tuple>
#include <utility>
#include <vector>

#include "finsler/chart.hpp"
#include "finsler/dual.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

// Maximum dual-nesting depth supported by each kind of erased function.
// The caps are chosen so that every derivative tower in the library bottoms
// out inside the scalar-field budget: Christoffel symbols evaluated with
// K extra levels reach the metric at level K+5 at most.
inline constexpr int kScalarFieldLevels = 8;
inline constexpr int kChartFieldLevels = 8;
inline constexpr int kSprayLevels = 5;
inline constexpr int kConnectionLevels = 3;
inline constexpr int kTensorFieldLevels = 3;

// Smoothness order used for closed-form registry objects.
inline constexpr int kSmoothEverywhere = 1000;

namespace detail {

template <template <int> class Sig, class Seq>
struct LeveledTupleT;
template <template <int> class Sig, int... Ks>
struct LeveledTupleT<Sig, std::integer_sequence<int, Ks...>> {
  using type = std::tuple<std::function<typename Sig<Ks>::type>...>;
};

/// Type-erased function evaluatable at every dual level 0..MaxK. A generic
/// callable is copied into one std::function per level at construction, so
/// user formulas are written once and differentiated exactly at any depth.
template <template <int> class Sig, int MaxK>
class Leveled {
 public:
  Leveled() = default;
  template <class F>
  explicit Leveled(F f) {
    init(std::move(f), std::make_integer_sequence<int, MaxK + 1>{});
  }

  template <int K, class... A>
  decltype(auto) at(A&&... args) const {
    static_assert(K >= 0 && K <= MaxK, "derivative tower exceeds the supported nesting depth");
    return std::get<static_cast<size_t>(K)>(fns_)(std::forward<A>(args)...);
  }

  explicit operator bool() const { return static_cast<bool>(std::get<0>(fns_)); }

 private:
  template <class F, int... Ks>
  void init(F f, std::integer_sequence<int, Ks...>) {
    ((std::get<static_cast<size_t>(Ks)>(fns_) = f), ...);
  }
  typename LeveledTupleT<Sig, std::make_integer_sequence<int, MaxK + 1>>::type fns_;
};

template <int K>
struct ScalarXVSig {
  using S = DualLevel<K>;
  using type = S(const Vec<S>&, const Vec<S>&);
};
template <int K>
struct ScalarXSig {
  using S = DualLevel<K>;
  using type = S(const Vec<S>&);
};
template <int K>
struct VecXSig {
  using S = DualLevel<K>;
  using type = Vec<S>(const Vec<S>&);
};
template <int K>
struct MatXSig {
  using S = DualLevel<K>;
  using type = Mat<S>(const Vec<S>&);
};
template <int K>
struct VecXVSig {
  using S = DualLevel<K>;
  using type = Vec<S>(const Vec<S>&, const Vec<S>&);
};

}  // namespace detail

template <class S>
Vec<S> lift_vec(const VecD& x) {
  Vec<S> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = S{x[i]};
  return out;
}

template <class S>
VecD real_vec(const Vec<S>& x) {
  VecD out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = real_of(x[i]);
  return out;
}

/// Scalar function of (x, v), e.g. a metric L or any h in F(A). Evaluatable
/// at any dual level up to kScalarFieldLevels.
class ScalarField {
 public:
  ScalarField() = default;
  template <class F>
  ScalarField(int dim, F f, int smoothness = kSmoothEverywhere)
      : dim_(dim), smooth_(smoothness), fns_(std::move(f)) {}

  template <int K>
  DualLevel<K> eval(const Vec<DualLevel<K>>& x, const Vec<DualLevel<K>>& v) const {
    return fns_.template at<K>(x, v);
  }
  double operator()(const TangentSample& s) const { return fns_.at<0>(s.x, s.v); }
  double operator()(const VecD& x, const VecD& v) const { return fns_.at<0>(x, v); }

  int dim() const { return dim_; }
  int smoothness_order() const { return smooth_; }
  explicit operator bool() const { return static_cast<bool>(fns_); }

 private:
  int dim_ = 0;
  int smooth_ = 0;
  detail::Leveled<detail::ScalarXVSig, kScalarFieldLevels> fns_;
};

/// Scalar coefficient function on the chart (depends on x only).
class ChartScalarField {
 public:
  ChartScalarField() = default;
  template <class F>
  ChartScalarField(int dim, F f) : dim_(dim), fns_(std::move(f)) {}

  static ChartScalarField constant(int dim, double c) {
    return {dim, [c](const auto& x) {
              using S = std::decay_t<decltype(x[0])>;
              (void)x;
              return S{c};
            }};
  }

  template <int K>
  DualLevel<K> eval(const Vec<DualLevel<K>>& x) const {
    return fns_.template at<K>(x);
  }
  double operator()(const VecD& x) const { return fns_.at<0>(x); }
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  detail::Leveled<detail::ScalarXSig, kChartFieldLevels> fns_;
};

/// Vector field on the chart, X: x -> R^n. Used both for geometry inputs
/// (Lie and Killing fields, extension fields) and for metric coefficients.
class VectorField {
 public:
  VectorField() = default;
  template <class F>
  VectorField(int dim, F f) : dim_(dim), fns_(std::move(f)) {}

  static VectorField constant(VecD v) {
    int dim = static_cast<int>(v.size());
    return {dim, [v](const auto& x) {
              using S = std::decay_t<decltype(x[0])>;
              return lift_vec<S>(v);
            }};
  }

  /// V(x) = v0 + A (x - x0); the seeded linear extensions used to stress
  /// extension-independence are built from this.
  static VectorField linear(VecD x0, VecD v0, MatD a) {
    int dim = static_cast<int>(v0.size());
    return {dim, [x0, v0, a, dim](const auto& x) {
              using S = std::decay_t<decltype(x[0])>;
              Vec<S> out = lift_vec<S>(v0);
              for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) out[i] += S{a(i, j)} * (x[j] - S{x0[j]});
              return out;
            }};
  }

  /// Planar rotation field (-x^2, x^1, 0, ...).
  static VectorField rotation(int dim) {
    return {dim, [dim](const auto& x) {
              using S = std::decay_t<decltype(x[0])>;
              Vec<S> out(static_cast<size_t>(dim), S{});
              out[0] = -x[1];
              out[1] = x[0];
              return out;
            }};
  }

  /// Identity dilation field x -> x.
  static VectorField dilation(int dim) {
    return {dim, [](const auto& x) { return x; }};
  }

  template <int K>
  Vec<DualLevel<K>> eval(const Vec<DualLevel<K>>& x) const {
    return fns_.template at<K>(x);
  }
  VecD operator()(const VecD& x) const { return fns_.at<0>(x); }

  /// Jacobian dX/dx at x (exact, one dual level).
  MatD jacobian(const VecD& x) const {
    const int n = dim_;
    MatD j(n);
    for (int c = 0; c < n; ++c) {
      Vec<Dual<double>> xx(n);
      for (int i = 0; i < n; ++i) xx[i] = Dual<double>{x[i], i == c ? 1.0 : 0.0};
      Vec<Dual<double>> val = fns_.at<1>(xx);
      for (int r = 0; r < n; ++r) j(r, c) = val[r].b;
    }
    return j;
  }

  int dim() const { return dim_; }
  explicit operator bool() const { return static_cast<bool>(fns_); }

 private:
  int dim_ = 0;
  detail::Leveled<detail::VecXSig, kChartFieldLevels> fns_;
};

/// Symmetric matrix coefficient field a(x) on the chart.
class MatrixField {
 public:
  MatrixField() = default;
  template <class F>
  MatrixField(int dim, F f) : dim_(dim), fns_(std::move(f)) {}

  static MatrixField constant(MatD m) {
    int dim = m.n;
    return {dim, [m](const auto& x) {
              using S = std::decay_t<decltype(x[0])>;
              (void)x;
              Mat<S> out(m.n);
              for (size_t i = 0; i < m.a.size(); ++i) out.a[i] = S{m.a[i]};
              return out;
            }};
  }

  static MatrixField identity(int dim, double scale = 1.0) {
    return constant([&] {
      MatD m(dim);
      for (int i = 0; i < dim; ++i) m(i, i) = scale;
      return m;
    }());
  }

  /// Round-sphere chart coefficients 4 delta_ij / (1+|x|^2)^2.
  static MatrixField sphere_chart(int dim) {
    return {dim, [dim](const auto& x) {
              using S = std::decay_t<decltype(x[0])>;
              S r2{};
              for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
              S den = (S{1.0} + r2) * (S{1.0} + r2);
              Mat<S> out(dim);
              for (int i = 0; i < dim; ++i) out(i, i) = S{4.0} / den;
              return out;
            }};
  }

  template <int K>
  Mat<DualLevel<K>> eval(const Vec<DualLevel<K>>& x) const {
    return fns_.template at<K>(x);
  }
  MatD operator()(const VecD& x) const { return fns_.at<0>(x); }
  int dim() const { return dim_; }
  explicit operator bool() const { return static_cast<bool>(fns_); }

 private:
  int dim_ = 0;
  detail::Leveled<detail::MatXSig, kChartFieldLevels> fns_;
};

/// Multi-index polynomial with double coefficients; the closed-form
/// coefficient format accepted by the CLI configs.
struct PolyTerm {
  double coef = 0.0;
  std::vector<int> powers;
};

struct Polynomial {
  int dim = 0;
  std::vector<PolyTerm> terms;

  template <class S>
  S eval(const Vec<S>& x) const {
    S sum{};
    for (const auto& t : terms) {
      S m{t.coef};
      for (int i = 0; i < dim; ++i)
        for (int k = 0; k < t.powers[i]; ++k) m *= x[i];
      sum += m;
    }
    return sum;
  }

  static Polynomial constant(int dim, double c) {
    return {dim, {PolyTerm{c, std::vector<int>(static_cast<size_t>(dim), 0)}}};
  }
};

inline ChartScalarField poly_scalar_field(Polynomial p) {
  return {p.dim, [p](const auto& x) { return p.eval(x); }};
}

inline VectorField poly_vector_field(std::vector<Polynomial> comps) {
  int dim = static_cast<int>(comps.size());
  return {dim, [comps, dim](const auto& x) {
            using S = std::decay_t<decltype(x[0])>;
            Vec<S> out(static_cast<size_t>(dim));
            for (int i = 0; i < dim; ++i) out[i] = comps[i].eval(x);
            return out;
          }};
}

/// Symmetric polynomial matrix field; `entries` holds the upper triangle
/// row by row (i <= j).
inline MatrixField poly_matrix_field(int dim, std::vector<Polynomial> entries) {
  return {dim, [dim, entries](const auto& x) {
            using S = std::decay_t<decltype(x[0])>;
            Mat<S> out(dim);
            size_t k = 0;
            for (int i = 0; i < dim; ++i)
              for (int j = i; j < dim; ++j, ++k) {
                S val = entries[k].eval(x);
                out(i, j) = val;
                out(j, i) = val;
              }
            return out;
          }};
}

}  // namespace finsler
