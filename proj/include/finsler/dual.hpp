#pragma once

#include <cmath>
#include <type_traits>

namespace finsler {

/// Forward-mode dual number. Nesting Dual<Dual<...>> gives exact mixed
/// derivatives of any order; all library derivatives up to third order
/// (and the derivative towers behind connections and curvature) run on
/// these, with finite differences kept only as an independent oracle.
template <class T>
struct Dual {
  T a{};  // value part
  T b{};  // derivative part

  Dual() = default;
  template <class U, class = std::enable_if_t<std::is_convertible_v<U, T>>>
  Dual(U value) : a(std::move(value)), b{} {}  // NOLINT: implicit lift of constants
  Dual(T value, T deriv) : a(std::move(value)), b(std::move(deriv)) {}

  Dual operator-() const { return {-a, -b}; }

  Dual& operator+=(const Dual& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    a -= o.a;
    b -= o.b;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    b = b * o.a + a * o.b;
    a = a * o.a;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    a = a / o.a;
    b = (b - a * o.b) / o.a;
    return *this;
  }

  friend Dual operator+(Dual x, const Dual& y) { return x += y; }
  friend Dual operator-(Dual x, const Dual& y) { return x -= y; }
  friend Dual operator*(const Dual& x, const Dual& y) {
    return {x.a * y.a, x.b * y.a + x.a * y.b};
  }
  friend Dual operator/(const Dual& x, const Dual& y) {
    T q = x.a / y.a;
    return {q, (x.b - q * y.b) / y.a};
  }
};

inline double real_of(double x) { return x; }
template <class T>
double real_of(const Dual<T>& d) {
  return real_of(d.a);
}

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  T r = sqrt(x.a);
  return {r, x.b / (r + r)};
}
template <class T>
Dual<T> exp(const Dual<T>& x) {
  T e = exp(x.a);
  return {e, x.b * e};
}
template <class T>
Dual<T> log(const Dual<T>& x) {
  return {log(x.a), x.b / x.a};
}
template <class T>
Dual<T> sin(const Dual<T>& x) {
  return {sin(x.a), x.b * cos(x.a)};
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
  return {cos(x.a), -x.b * sin(x.a)};
}

/// DualLevel<K>: K-fold nested dual scalar; DualLevel<0> is double.
template <int K>
struct DualLevelT {
  using type = Dual<typename DualLevelT<K - 1>::type>;
};
template <>
struct DualLevelT<0> {
  using type = double;
};
template <int K>
using DualLevel = typename DualLevelT<K>::type;

template <class S>
struct LevelOfT : std::integral_constant<int, 0> {};
template <class T>
struct LevelOfT<Dual<T>> : std::integral_constant<int, 1 + LevelOfT<T>::value> {};
template <class S>
inline constexpr int level_of = LevelOfT<S>::value;

/// Innermost mixed derivative of a nested dual: peels the derivative part
/// of every level. For a K-level dual seeded along directions z_1..z_K this
/// is the K-th mixed partial.
inline double top_mixed(double x) { return x; }
template <class T>
double top_mixed(const Dual<T>& d) {
  return top_mixed(d.b);
}

}  // namespace finsler
