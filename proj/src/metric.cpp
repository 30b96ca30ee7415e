#include "finsler/metric.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

#include "finsler/sampling.hpp"

namespace finsler {

MetricSpec MetricSpec::euclidean(ChartDomain chart) {
  MetricSpec m;
  m.kind_ = MetricKind::euclidean;
  m.name_ = "euclidean";
  int n = chart.dim();
  m.domain_ = ConicDomain::slit(std::move(chart));
  m.a_ = MatrixField::identity(n);
  m.L_ = ScalarField(n, [](const auto& x, const auto& v) {
    using S = std::decay_t<decltype(x[0])>;
    (void)x;
    S s{};
    for (const auto& c : v) s += c * c;
    return s;
  });
  return m;
}

MetricSpec MetricSpec::riemannian(MatrixField a, ChartDomain chart, std::string name) {
  MetricSpec m;
  m.kind_ = MetricKind::riemannian;
  m.name_ = std::move(name);
  int n = chart.dim();
  if (a.dim() != n) throw UsageError("riemannian metric: coefficient dim mismatch");
  m.domain_ = ConicDomain::slit(std::move(chart));
  m.a_ = a;
  m.L_ = ScalarField(n, [a](const auto& x, const auto& v) {
    using S = std::decay_t<decltype(x[0])>;
    constexpr int K = level_of<S>;
    Mat<S> coeff = a.template eval<K>(x);
    return bilinear(coeff, v, v);
  });
  return m;
}

MetricSpec MetricSpec::randers(MatrixField a, VectorField b, ChartDomain chart, std::string name) {
  MetricSpec m;
  m.kind_ = MetricKind::randers;
  m.name_ = std::move(name);
  int n = chart.dim();
  if (a.dim() != n || b.dim() != n) throw UsageError("randers metric: coefficient dim mismatch");
  m.domain_ = ConicDomain::slit(std::move(chart));
  m.a_ = a;
  m.b_ = b;
  m.L_ = ScalarField(n, [a, b](const auto& x, const auto& v) {
    using S = std::decay_t<decltype(x[0])>;
    constexpr int K = level_of<S>;
    Mat<S> coeff = a.template eval<K>(x);
    Vec<S> drift = b.template eval<K>(x);
    S f = sqrt(bilinear(coeff, v, v)) + dot(drift, v);
    return f * f;
  });
  return m;
}

MetricSpec MetricSpec::quartic(std::vector<ChartScalarField> axis_coefficients,
                               std::vector<ChartScalarField> cross_coefficients, ChartDomain chart,
                               double cone_margin, std::string name) {
  MetricSpec m;
  m.kind_ = MetricKind::quartic;
  m.name_ = std::move(name);
  const int n = chart.dim();
  if (static_cast<int>(axis_coefficients.size()) != n)
    throw UsageError("quartic metric: need one coefficient per axis");
  size_t pairs = static_cast<size_t>(n) * (n - 1) / 2;
  if (!cross_coefficients.empty() && cross_coefficients.size() != pairs)
    throw UsageError("quartic metric: need one cross coefficient per axis pair (i<j)");
  auto coeffs = axis_coefficients;
  auto cross = cross_coefficients;
  m.domain_ = ConicDomain(std::move(chart), [cone_margin](const VecD& x, const VecD& v) {
    (void)x;
    double r = norm2(v);
    for (double c : v)
      if (!(c > cone_margin * r)) return false;
    return true;
  });
  m.L_ = ScalarField(n, [coeffs, cross, n](const auto& x, const auto& v) {
    using S = std::decay_t<decltype(x[0])>;
    constexpr int K = level_of<S>;
    S q{};
    for (int i = 0; i < n; ++i) {
      S c = coeffs[i].template eval<K>(x);
      S v2 = v[i] * v[i];
      q += c * v2 * v2;
    }
    if (!cross.empty()) {
      size_t p = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
          S d = cross[p].template eval<K>(x);
          S vij = v[i] * v[j];
          q += d * vij * vij;
        }
    }
    return sqrt(q);
  });
  return m;
}

MetricSpec MetricSpec::quartic(std::vector<ChartScalarField> axis_coefficients, ChartDomain chart,
                               double cone_margin, std::string name) {
  return quartic(std::move(axis_coefficients), {}, std::move(chart), cone_margin, std::move(name));
}

MetricSpec MetricSpec::custom(ScalarField L, ConicDomain domain, std::string name) {
  if (L.smoothness_order() < 3)
    throw UsageError("custom metric: lagrangian must declare smoothness order >= 3");
  MetricSpec m;
  m.kind_ = MetricKind::custom;
  m.name_ = std::move(name);
  m.domain_ = std::move(domain);
  m.L_ = std::move(L);
  return m;
}

void MetricSpec::validate(int probes, uint64_t seed) const {
  auto samples = draw_samples(domain_, probes, seed);
  const double lambdas[] = {0.5, 2.0, 10.0};
  if (kind_ == MetricKind::randers) {
    // strong convexity needs |b|_a < 1 everywhere on the chart
    for (const auto& s : samples) {
      MatD a = a_(s.x);
      VecD b = b_(s.x);
      double bnorm2 = bilinear(inverse(a), b, b);
      if (!(bnorm2 < 1.0))
        throw EvaluationError(name_ + ": |b|_a >= 1 at x=" + format_vec(s.x) +
                              " (metric is not strongly convex)");
    }
  }
  for (const auto& s : samples) {
    double l = evaluate_L(*this, s);
    for (double lam : lambdas) {
      VecD vs = s.v;
      for (auto& c : vs) c *= lam;
      if (!domain_.contains(s.x, vs))
        throw DomainError(name_ + ": domain is not conic at x=" + format_vec(s.x) +
                          " v=" + format_vec(s.v));
      double ls = L_(s.x, vs);
      if (std::fabs(ls - lam * lam * l) > 1e-9 * lam * lam * std::fabs(l))
        throw EvaluationError(name_ + ": lagrangian is not 2-homogeneous at x=" + format_vec(s.x));
    }
    fundamental_tensor(*this, s);  // throws on degeneracy
  }
}

double evaluate_L(const MetricSpec& metric, const TangentSample& sample) {
  metric.domain().require(sample, "evaluate_L");
  double l = metric.lagrangian()(sample);
  if (!std::isfinite(l) || l <= 0.0)
    throw EvaluationError(metric.name() + ": non-positive lagrangian at x=" + format_vec(sample.x) +
                          " v=" + format_vec(sample.v));
  return l;
}

FundamentalTensorValue fundamental_tensor(const MetricSpec& metric, const TangentSample& sample) {
  metric.domain().require(sample, "fundamental_tensor");
  FundamentalTensorValue out;
  out.g = detail::metric_tensor(metric.lagrangian(), sample.x, sample.v);
  out.det = determinant(out.g);
  if (!std::isfinite(out.det) || std::fabs(out.det) <= 1e-10)
    throw DegeneracyError(metric.name() + ": degenerate fundamental tensor (det=" +
                          std::to_string(out.det) + ") at x=" + format_vec(sample.x) +
                          " v=" + format_vec(sample.v));
  InverseInfo info;
  inverse(out.g, &info);
  if (info.condition > 1e12) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::fprintf(stderr,
                   "warning: fundamental tensor condition %.3g exceeds 1e12 at x=%s v=%s "
                   "(inverses may lose digits)\n",
                   info.condition, format_vec(sample.x).c_str(), format_vec(sample.v).c_str());
  }
  return out;
}

CartanTensorValue cartan_tensor(const MetricSpec& metric, const TangentSample& sample) {
  metric.domain().require(sample, "cartan_tensor");
  CartanTensorValue out;
  out.n = metric.dim();
  out.c = detail::cartan_tensor_flat(metric.lagrangian(), sample.x, sample.v);
  return out;
}

}  // namespace finsler
