#pragma once

#include <optional>
#include <string>

#include "finsler/chart.hpp"
#include "finsler/derivatives.hpp"
#include "finsler/fields.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

enum class MetricKind { euclidean, riemannian, randers, quartic, custom };

/// Fundamental tensor g_v at a sample: one half of the second fiber
/// derivative of L.
struct FundamentalTensorValue {
  MatD g;
  double det = 0.0;
  double operator()(int i, int j) const { return g(i, j); }
};

/// Cartan tensor C_v at a sample: one quarter of the third fiber derivative
/// of L; totally symmetric and null when contracted with v.
struct CartanTensorValue {
  int n = 0;
  VecD c;  // flat n^3, index (i*n+j)*n+k
  double operator()(int i, int j, int k) const {
    return c[(static_cast<size_t>(i) * n + j) * n + k];
  }
  double operator()(const VecD& z, const VecD& u, const VecD& w) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s += (*this)(i, j, k) * z[i] * u[j] * w[k];
    return s;
  }
};

namespace detail {

/// g_ij(x, v) = 1/2 d^2 L / dy^i dy^j, kept at the caller's scalar level.
template <class S>
Mat<S> metric_tensor(const ScalarField& L, const Vec<S>& x, const Vec<S>& v) {
  const int n = static_cast<int>(x.size());
  Mat<S> g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      S val = S{0.5} * fiber_partial2(L, x, v, i, j);
      g(i, j) = val;
      g(j, i) = val;
    }
  return g;
}

/// C_ijk(x, v) = 1/4 d^3 L / dy^i dy^j dy^k (totally symmetric fill).
template <class S>
Vec<S> cartan_tensor_flat(const ScalarField& L, const Vec<S>& x, const Vec<S>& v) {
  const int n = static_cast<int>(x.size());
  Vec<S> c(static_cast<size_t>(n) * n * n, S{});
  auto idx = [n](int i, int j, int k) { return (static_cast<size_t>(i) * n + j) * n + k; };
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        S val = S{0.25} * fiber_partial3(L, x, v, i, j, k);
        int p[3] = {i, j, k};
        c[idx(p[0], p[1], p[2])] = val;
        c[idx(p[0], p[2], p[1])] = val;
        c[idx(p[1], p[0], p[2])] = val;
        c[idx(p[1], p[2], p[0])] = val;
        c[idx(p[2], p[0], p[1])] = val;
        c[idx(p[2], p[1], p[0])] = val;
      }
  return c;
}

}  // namespace detail

/// A pseudo-Finsler metric on a chart: positive, 2-homogeneous lagrangian L
/// with nondegenerate fundamental tensor on its conic domain. Instances come
/// from the registry factories below or from `custom`.
class MetricSpec {
 public:
  MetricKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dim() const { return domain_.dim(); }
  const ConicDomain& domain() const { return domain_; }
  const ScalarField& lagrangian() const { return L_; }

  /// Riemannian / Randers coefficient fields (empty otherwise); exposed so
  /// that independent oracles can be built from the raw coefficients.
  const MatrixField& coefficient_matrix() const { return a_; }
  const VectorField& drift_form() const { return b_; }

  /// L = sum (v^i)^2 over a box chart; the slit tangent bundle as domain.
  static MetricSpec euclidean(ChartDomain chart);

  /// L = a_ij(x) v^i v^j for a symmetric nondegenerate coefficient field.
  static MetricSpec riemannian(MatrixField a, ChartDomain chart, std::string name = "riemannian");

  /// L = (sqrt(a_ij v^i v^j) + b_i v^i)^2 with |b|_a < 1; domain is the
  /// whole slit tangent chart.
  static MetricSpec randers(MatrixField a, VectorField b, ChartDomain chart,
                            std::string name = "randers");

  /// L = sqrt(sum_i c_i(x) (v^i)^4 + sum_{i<j} d_ij(x) (v^i v^j)^2) on the
  /// cone {v : v^i > margin |v|}, which keeps clear of the degeneracy loci
  /// on the axes. `cross_coefficients` lists d_ij for i<j in lexicographic
  /// order (empty for a purely diagonal quartic, which is of Berwald type).
  static MetricSpec quartic(std::vector<ChartScalarField> axis_coefficients,
                            std::vector<ChartScalarField> cross_coefficients, ChartDomain chart,
                            double cone_margin = 0.15, std::string name = "quartic");
  static MetricSpec quartic(std::vector<ChartScalarField> axis_coefficients, ChartDomain chart,
                            double cone_margin = 0.15, std::string name = "quartic");

  /// User lagrangian; must declare smoothness order >= 3.
  static MetricSpec custom(ScalarField L, ConicDomain domain, std::string name = "custom");

  /// Probes positivity, 2-homogeneity (lambda in {0.5, 2, 10}, rel 1e-9),
  /// conic membership and nondegeneracy on `probes` seeded samples.
  /// Throws on the first violated invariant.
  void validate(int probes = 20, uint64_t seed = 0x5eedULL) const;

 private:
  MetricKind kind_ = MetricKind::custom;
  std::string name_;
  ConicDomain domain_;
  ScalarField L_;
  MatrixField a_;
  VectorField b_;
};

/// L(x, v); throws DomainError outside the metric's domain and
/// EvaluationError on non-positive or non-finite values.
double evaluate_L(const MetricSpec& metric, const TangentSample& sample);

/// Fundamental tensor at a sample; throws DegeneracyError (naming the
/// sample) when |det g| <= 1e-10.
FundamentalTensorValue fundamental_tensor(const MetricSpec& metric, const TangentSample& sample);

/// Cartan tensor at a sample.
CartanTensorValue cartan_tensor(const MetricSpec& metric, const TangentSample& sample);

}  // namespace finsler
