#include <doctest.h>

#include "finsler/chart.hpp"
#include "finsler/derivatives.hpp"
#include "finsler/metric.hpp"
#include "finsler/sampling.hpp"
#include "finsler/tensor.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

MetricSpec randers2d() {
  auto chart = ChartDomain::box({-2.0, -2.0}, {2.0, 2.0});
  MatD a(2);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  return MetricSpec::randers(MatrixField::constant(a),
                             VectorField::constant({0.5, 0.0}), chart);
}

MetricSpec randers2d_curved() {
  auto chart = ChartDomain::box({-1.5, -1.5}, {1.5, 1.5});
  MatrixField a(2, [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    Mat<S> m(2);
    m(0, 0) = S{1.0} + S{0.1} * x[1] * x[1];
    m(1, 1) = S{1.0} + S{0.1} * x[0] * x[0];
    m(0, 1) = S{0.05} * x[0] * x[1];
    m(1, 0) = m(0, 1);
    return m;
  });
  VectorField b(2, [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    Vec<S> out(2);
    out[0] = S{0.3} + S{0.1} * x[1];
    out[1] = S{0.1} * x[0];
    return out;
  });
  return MetricSpec::randers(a, b, chart, "randers_curved");
}

}  // namespace

TEST_CASE("dual numbers: nested exact derivatives") {
  // f(t) = t^3 * exp(t): f'''(t) = (t^3 + 9t^2 + 18t + 6) e^t
  using D3 = DualLevel<3>;
  double t0 = 0.7;
  D3 t{{{t0, 1.0}, {1.0, 0.0}}, {{1.0, 0.0}, {0.0, 0.0}}};
  D3 f = t * t * t * exp(t);
  double expect = (t0 * t0 * t0 + 9 * t0 * t0 + 18 * t0 + 6) * std::exp(t0);
  CHECK(top_mixed(f) == doctest::Approx(expect).epsilon(1e-12));

  using D1 = Dual<double>;
  D1 x{2.0, 1.0};
  CHECK(sqrt(x).b == doctest::Approx(0.5 / std::sqrt(2.0)));
  CHECK((D1{3.0, 1.0} / D1{2.0, 0.0}).b == doctest::Approx(0.5));
}

TEST_CASE("fiber_derivative: quadratic and v-independent cases") {
  ScalarField sq(2, [](const auto& x, const auto& v) {
    (void)x;
    return v[0] * v[0] + v[1] * v[1];
  });
  TangentSample s({0.3, -0.2}, {1.0, 2.0});
  VecD z{0.5, -1.0};
  double d = fiber_derivative(sq, s, std::array<VecD, 1>{z});
  CHECK(d == doctest::Approx(2.0 * (s.v[0] * z[0] + s.v[1] * z[1])));

  ScalarField base_only(2, [](const auto& x, const auto& v) {
    (void)v;
    return x[0] + x[1] * x[1];
  });
  for (int order = 1; order <= 3; ++order) {
    std::vector<VecD> dirs(order, z);
    CHECK(fiber_derivative(base_only, s, dirs) == doctest::Approx(0.0));
  }
}

TEST_CASE("fiber_derivative: randers second derivative matches FD oracle") {
  auto metric = randers2d();
  TangentSample s({0.0, 0.0}, {1.0, 0.0});
  VecD z{0.0, 1.0};
  std::vector<VecD> dirs{z, z};
  double ad = fiber_derivative(metric.lagrangian(), metric.domain(), s, dirs);
  double fd = testing::fd_fiber(metric.lagrangian(), s, dirs);
  CHECK(ad == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("base_derivative: coordinate and x-independent cases, FD cross-check") {
  ScalarField coord(2, [](const auto& x, const auto& v) {
    (void)v;
    return x[0];
  });
  TangentSample s({0.1, 0.4}, {1.0, 1.0});
  CHECK(base_derivative(coord, s, {1.0, 0.0}) == doctest::Approx(1.0));

  ScalarField fiber_only(2, [](const auto& x, const auto& v) {
    (void)x;
    return v[0] * v[1];
  });
  CHECK(base_derivative(fiber_only, s, {1.0, 0.0}) == doctest::Approx(0.0));

  // a_ij(x) = (1+x^1) delta_ij at x=0, v=e1, u=e1: dL/dx^1 = |v|^2 = 1.
  MatrixField a(2, [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    Mat<S> m(2);
    m(0, 0) = S{1.0} + x[0];
    m(1, 1) = S{1.0} + x[0];
    return m;
  });
  auto metric = MetricSpec::riemannian(a, ChartDomain::box({-0.5, -0.5}, {0.5, 0.5}));
  TangentSample s0({0.0, 0.0}, {1.0, 0.0});
  double ad = base_derivative(metric.lagrangian(), s0, {1.0, 0.0});
  CHECK(ad == doctest::Approx(1.0));
  CHECK(ad == doctest::Approx(testing::fd_base(metric.lagrangian(), s0, {1.0, 0.0}))
                  .epsilon(1e-6));
}

TEST_CASE("tensor product: unit scalar, coordinate one-forms") {
  TensorValue one = TensorValue::scalar(2, 1.0);
  TensorValue t2(Valence{1, 1}, 2);
  t2.at({0, 1}) = 3.0;
  t2.at({1, 0}) = -2.0;
  TensorValue p = tensor_product(one, t2);
  REQUIRE(p.valence == Valence{1, 1});
  for (size_t i = 0; i < p.c.size(); ++i) CHECK(p.c[i] == t2.c[i]);

  TensorValue dx1(Valence{0, 1}, 2), dx2(Valence{0, 1}, 2);
  dx1.at({0}) = 1.0;
  dx2.at({1}) = 1.0;
  TensorValue m = tensor_product(dx1, dx2);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      CHECK(m.at({j, k}) == doctest::Approx(j == 0 && k == 1 ? 1.0 : 0.0));
}

TEST_CASE("contract: identity trace and pairing") {
  const int n = 3;
  TensorValue id(Valence{1, 1}, n);
  for (int i = 0; i < n; ++i) id.at({i, i}) = 1.0;
  TensorValue tr = contract(id, 0, 0);
  CHECK(tr.c[0] == doctest::Approx(static_cast<double>(n)));

  TensorValue x(Valence{1, 0}, n), theta(Valence{0, 1}, n);
  x.at({0}) = 2.0;
  x.at({2}) = -1.0;
  theta.at({0}) = 0.5;
  theta.at({2}) = 4.0;
  TensorValue pairing = contract(tensor_product(x, theta), 0, 0);
  CHECK(pairing.c[0] == doctest::Approx(2.0 * 0.5 + (-1.0) * 4.0));
}

TEST_CASE("contract: g^{-1} (x) g over matching slots gives the identity") {
  auto metric = randers2d_curved();
  TangentSample s({0.4, -0.3}, {1.0, 0.7});
  MatD g = fundamental_tensor(metric, s).g;
  MatD ginv = inverse(g);
  const int n = 2;
  TensorValue tg(Valence{0, 2}, n), tginv(Valence{2, 0}, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      tg.at({i, j}) = g(i, j);
      tginv.at({i, j}) = ginv(i, j);
    }
  TensorValue idt = contract(tensor_product(tginv, tg), 1, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(idt.at({i, j}) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));

  // ginv (x) g (x) g fully contracted against ginv reproduces g * gtrace(g) = n g.
  TensorValue a = tensor_product(tensor_product(tginv, tg), tg);
  TensorValue b = contract(contract(a, 1, 2), 0, 2);
  for (int c0 = 0; c0 < n; ++c0)
    for (int d = 0; d < n; ++d) {
      double direct = 0.0;
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) direct += ginv(k, m) * g(c0, d) * g(m, k);
      CHECK(b.at({c0, d}) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(b.at({c0, d}) == doctest::Approx(n * g(c0, d)).epsilon(1e-10));
    }
}

TEST_CASE("chart domains: openness, conic membership, degenerate directions") {
  auto chart = ChartDomain::box({-1.0, -1.0}, {1.0, 1.0});
  CHECK(chart.contains({0.0, 0.0}));
  CHECK(!chart.contains({1.5, 0.0}));
  CHECK(chart.is_interior({0.9, 0.9}, 1e-6));
  CHECK(!chart.is_interior({1.0 - 1e-9, 0.0}, 1e-6));

  auto cone = ConicDomain(chart, [](const VecD&, const VecD& v) {
    double r = norm2(v);
    return v[0] > 0.1 * r && v[1] > 0.1 * r;
  });
  VecD x{0.0, 0.0};
  VecD v{1.0, 1.0};
  for (double lam : {0.5, 2.0, 10.0}) {
    VecD vs = v;
    for (auto& c : vs) c *= lam;
    CHECK(cone.contains(x, vs));
  }
  CHECK(!cone.contains(x, {1.0, -1.0}));
  CHECK(!cone.contains(x, {0.0, 0.0}));

  CHECK_THROWS_AS(TangentSample({0.0, 0.0}, {1e-13, 0.0}), DomainError);

  // every chart point of the cone domain admits some member direction
  SeededRng rng(3);
  for (int k = 0; k < 20; ++k) {
    VecD xp = rng.vector(2, -0.95, 0.95);
    CHECK(cone.contains(xp, {1.0, 1.0}));
  }
}

TEST_CASE("derivative operations: domain errors, non-finite values, smoothness guard") {
  auto metric = randers2d();
  TangentSample outside({9.0, 9.0}, {1.0, 0.0});
  std::vector<VecD> one{{0.0, 1.0}};
  CHECK_THROWS_AS(fiber_derivative(metric.lagrangian(), metric.domain(), outside, one),
                  DomainError);

  ScalarField rooted(2, [](const auto& x, const auto& v) {
    (void)x;
    return sqrt(v[0]);  // NaN for v0 < 0
  });
  TangentSample neg({0.0, 0.0}, {-1.0, 0.5});
  CHECK_THROWS_AS(fiber_derivative(rooted, neg, one), EvaluationError);

  ScalarField rough(2, [](const auto& x, const auto& v) {
    (void)x;
    return v[0] * v[0] + v[1] * v[1];
  }, 1);
  TangentSample s({0.0, 0.0}, {1.0, 0.0});
  std::vector<VecD> two{{0.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(fiber_derivative(rough, s, two), UsageError);
}

TEST_CASE("property: mixed-partial symmetry and AD-FD agreement") {
  auto metric = randers2d_curved();
  auto samples = draw_samples(metric.domain(), 100, 421);
  const auto& L = metric.lagrangian();
  SeededRng rng(77);
  for (const auto& s : samples) {
    VecD z1 = rng.unit_vector(2), z2 = rng.unit_vector(2);
    double d12 = fiber_derivative(L, s, std::array<VecD, 2>{z1, z2});
    double d21 = fiber_derivative(L, s, std::array<VecD, 2>{z2, z1});
    CHECK(d12 == doctest::Approx(d21).epsilon(1e-9));
  }
  // AD vs FD on first/second fiber and first base derivatives.
  for (int k = 0; k < 25; ++k) {
    const auto& s = samples[static_cast<size_t>(k)];
    VecD z1 = rng.unit_vector(2), z2 = rng.unit_vector(2), u = rng.unit_vector(2);
    std::vector<VecD> d1{z1}, d2{z1, z2};
    CHECK(fiber_derivative(L, s, d1) ==
          doctest::Approx(testing::fd_fiber(L, s, d1)).epsilon(1e-6));
    CHECK(fiber_derivative(L, s, d2) ==
          doctest::Approx(testing::fd_fiber(L, s, d2)).epsilon(1e-6));
    CHECK(base_derivative(L, s, u) ==
          doctest::Approx(testing::fd_base(L, s, u)).epsilon(1e-6));
  }
}
