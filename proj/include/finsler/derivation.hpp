#pragma once

#include <functional>

#include "finsler/sampling.hpp"
#include "finsler/tensor_field.hpp"

namespace finsler {

/// A vector field extending a tangent sample: V(x0) = v0 exactly. The
/// derivation engine takes extensions explicitly so that independence of the
/// result from the chosen extension is a first-class, testable surface.
struct ExtensionField {
  TangentSample base;
  VectorField field;
};

enum class ExtensionMode { constant, linear };

/// constant: V(x) = v0. linear: V(x) = v0 + A (x - x0) with a seeded random
/// matrix A (zero seed matrix reduces to the constant extension); different
/// seeds give extensions with equal value and different Jacobians at x0.
inline ExtensionField make_extension(const TangentSample& sample, ExtensionMode mode,
                                     uint64_t seed = 0) {
  if (mode == ExtensionMode::constant) return {sample, VectorField::constant(sample.v)};
  const int n = sample.dim();
  SeededRng rng(seed);
  MatD a(n);
  double scale = 0.6 * std::max(1.0, norm2(sample.v));
  if (seed != 0)
    for (auto& e : a.a) e = rng.uniform(-scale, scale);
  return {sample, VectorField::linear(sample.x, sample.v, a)};
}

/// Checks that an extension actually extends the sample it is used at.
inline void require_extends(const ExtensionField& ext, const TangentSample& sample,
                            const char* where) {
  const int n = sample.dim();
  VecD at_base = ext.field(sample.x);
  for (int i = 0; i < n; ++i)
    if (std::fabs(at_base[i] - sample.v[i]) > 1e-12 * std::max(1.0, norm2(sample.v)))
      throw UsageError(std::string(where) + ": extension does not take the value v at the sample");
}

/// An anisotropic derivation: associated vector field Z plus the action
/// delta^v on vector fields (additive and Leibniz over functions). The
/// covariant and Lie derivatives are the two library instances.
struct AnisotropicDerivation {
  VectorField Z;
  std::function<VecD(const TangentSample&, const VectorField&)> delta;

  /// Nonlinear coefficients of delta at a sample: delta^v(d_j) = c^k_j d_k,
  /// recovered by applying delta to the coordinate frame fields.
  MatD frame_coefficients(const TangentSample& sample) const {
    const int n = sample.dim();
    MatD c(n);
    for (int j = 0; j < n; ++j) {
      VecD ej(static_cast<size_t>(n), 0.0);
      ej[static_cast<size_t>(j)] = 1.0;
      VecD col = delta(sample, VectorField::constant(ej));
      for (int k = 0; k < n; ++k) c(k, j) = col[k];
    }
    return c;
  }
};

/// Derivation of a scalar function: D(h)(v) = Z(h(V))(pi(v)) - d^nu h(delta^v V).
/// The result does not depend on the extension V; tests exercise that.
inline double derive_scalar(const AnisotropicDerivation& d, const ScalarField& h,
                            const TangentSample& sample, const ExtensionField& ext) {
  require_extends(ext, sample, "derive_scalar");
  VecD z0 = d.Z(sample.x);
  auto x1 = promote(sample.x, z0);
  double term1 = h.eval<1>(x1, ext.field.eval<1>(x1)).b;
  VecD w = d.delta(sample, ext.field);
  double term2 = 0.0;
  if (norm2(w) >= kMinDirectionNorm)
    term2 = fiber_derivative(h, sample, std::array<VecD, 1>{w});
  return term1 - term2;
}

/// The unique tensor derivation extending (Z, delta): componentwise
///   (D T)^I_J = Z(T_V(..)) - d^nu T(delta^v V, ..)
///               + sum_a c^{i_a}_m T^{..m..}_J - sum_b c^m_{j_b} T^I_{..m..}
/// with c the frame coefficients of delta. Valence is preserved.
inline TensorValue derive_tensor(const AnisotropicDerivation& d, const AnisotropicTensorField& t,
                                 const TangentSample& sample, const ExtensionField& ext) {
  require_extends(ext, sample, "derive_tensor");
  const int n = t.dim();
  const Valence val = t.valence();
  const int r = val.r, s = val.s;

  VecD z0 = d.Z(sample.x);
  auto x1 = promote(sample.x, z0);
  TensorValueT<Dual<double>> along_z = t.eval<1>(x1, ext.field.eval<1>(x1));

  VecD w = d.delta(sample, ext.field);
  bool have_w = norm2(w) >= kMinDirectionNorm;
  TensorValueT<Dual<double>> vert;
  if (have_w) vert = t.eval<1>(promote_const(sample.x), promote(sample.v, w));

  TensorValue t0 = t(sample);
  MatD c = d.frame_coefficients(sample);

  TensorValue out(val, n);
  std::vector<int> idx(static_cast<size_t>(val.total()), 0);
  for (size_t f = 0; f < out.c.size(); ++f) {
    size_t rem = f;
    for (int q = val.total() - 1; q >= 0; --q) {
      idx[static_cast<size_t>(q)] = static_cast<int>(rem % n);
      rem /= n;
    }
    double acc = along_z.c[f].b - (have_w ? vert.c[f].b : 0.0);
    std::vector<int> jdx = idx;
    for (int a = 0; a < r; ++a) {
      int ia = idx[static_cast<size_t>(a)];
      for (int m = 0; m < n; ++m) {
        jdx[static_cast<size_t>(a)] = m;
        acc += c(ia, m) * t0.at(jdx);
      }
      jdx[static_cast<size_t>(a)] = ia;
    }
    for (int b = 0; b < s; ++b) {
      int jb = idx[static_cast<size_t>(r + b)];
      for (int m = 0; m < n; ++m) {
        jdx[static_cast<size_t>(r + b)] = m;
        acc -= c(m, jb) * t0.at(jdx);
      }
      jdx[static_cast<size_t>(r + b)] = jb;
    }
    out.c[f] = acc;
  }
  return out;
}

}  // namespace finsler
