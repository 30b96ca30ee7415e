#pragma once

#include <array>
#include <cstddef>
#include <numeric>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

struct Valence {
  int r = 0;  // contravariant slots
  int s = 0;  // covariant slots
  int total() const { return r + s; }
  friend bool operator==(const Valence& a, const Valence& b) = default;
};

/// Dense component array of an (r,s)-tensor value at one sample.
/// Index order is contravariant-first, row-major: component
/// T^{i_1..i_r}_{j_1..j_s} lives at flat index (((i_1*n+i_2)...)*n+j_s).
template <class S>
struct TensorValueT {
  Valence valence;
  int n = 0;
  Vec<S> c;

  TensorValueT() = default;
  TensorValueT(Valence val, int dim) : valence(val), n(dim) {
    size_t size = 1;
    for (int k = 0; k < valence.total(); ++k) size *= static_cast<size_t>(n);
    c.assign(size, S{});
  }

  static TensorValueT scalar(int dim, S value) {
    TensorValueT t(Valence{0, 0}, dim);
    t.c[0] = value;
    return t;
  }

  size_t flat(const std::vector<int>& idx) const {
    size_t f = 0;
    for (int k = 0; k < valence.total(); ++k) f = f * static_cast<size_t>(n) + idx[k];
    return f;
  }

  S& at(const std::vector<int>& idx) { return c[flat(idx)]; }
  const S& at(const std::vector<int>& idx) const { return c[flat(idx)]; }
};

using TensorValue = TensorValueT<double>;

/// Largest |component| (real part), used to scale tolerances.
template <class S>
double max_abs(const TensorValueT<S>& t) {
  double m = 0.0;
  for (const auto& x : t.c) m = std::max(m, std::fabs(real_of(x)));
  return m;
}

/// Componentwise outer product; slots of the factors keep their order, with
/// the second factor's contravariant (resp. covariant) block appended after
/// the first's.
template <class S>
TensorValueT<S> tensor_product(const TensorValueT<S>& t1, const TensorValueT<S>& t2) {
  if (t1.n != t2.n) throw UsageError("tensor_product: dimension mismatch");
  const int n = t1.n;
  TensorValueT<S> out(Valence{t1.valence.r + t2.valence.r, t1.valence.s + t2.valence.s}, n);

  const int r1 = t1.valence.r, s1 = t1.valence.s;
  const int r2 = t2.valence.r, s2 = t2.valence.s;
  std::vector<int> idx(static_cast<size_t>(out.valence.total()), 0);
  std::vector<int> i1(static_cast<size_t>(t1.valence.total()));
  std::vector<int> i2(static_cast<size_t>(t2.valence.total()));
  const size_t total = out.c.size();
  for (size_t f = 0; f < total; ++f) {
    // decode f into idx
    size_t rem = f;
    for (int k = out.valence.total() - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int k = 0; k < r1; ++k) i1[k] = idx[k];
    for (int k = 0; k < s1; ++k) i1[r1 + k] = idx[r1 + r2 + k];
    for (int k = 0; k < r2; ++k) i2[k] = idx[r1 + k];
    for (int k = 0; k < s2; ++k) i2[r2 + k] = idx[r1 + r2 + s1 + k];
    out.c[f] = t1.at(i1) * t2.at(i2);
  }
  return out;
}

/// (i,j)-contraction: sums the i-th contravariant against the j-th covariant
/// slot (0-based).
template <class S>
TensorValueT<S> contract(const TensorValueT<S>& t, int i, int j) {
  const int r = t.valence.r, s = t.valence.s, n = t.n;
  if (r < 1 || s < 1) throw UsageError("contract: tensor has no slot pair");
  if (i < 0 || i >= r || j < 0 || j >= s) throw UsageError("contract: slot out of range");
  TensorValueT<S> out(Valence{r - 1, s - 1}, n);
  std::vector<int> oidx(static_cast<size_t>(out.valence.total()), 0);
  std::vector<int> tidx(static_cast<size_t>(t.valence.total()), 0);
  const size_t total = out.c.size();
  for (size_t f = 0; f < total; ++f) {
    size_t rem = f;
    for (int k = out.valence.total() - 1; k >= 0; --k) {
      oidx[k] = static_cast<int>(rem % n);
      rem /= n;
    }
    S sum{};
    for (int m = 0; m < n; ++m) {
      int p = 0;
      for (int k = 0; k < r; ++k) tidx[k] = (k == i) ? m : oidx[p++];
      for (int k = 0; k < s; ++k) tidx[r + k] = (k == j) ? m : oidx[p++];
      sum += t.at(tidx);
    }
    out.c[f] = sum;
  }
  return out;
}

}  // namespace finsler
