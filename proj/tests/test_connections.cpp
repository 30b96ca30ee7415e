#include <doctest.h>

#include <cmath>

#include "finsler/curvature.hpp"
#include "finsler/sampling.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

MetricSpec randers_curved() {
  MatrixField a(2, [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    Mat<S> m(2);
    m(0, 0) = S{1.0} + S{0.2} * x[1] * x[1];
    m(1, 1) = S{1.0} + S{0.2} * x[0] * x[0];
    m(0, 1) = S{0.1} * x[0] * x[1];
    m(1, 0) = m(0, 1);
    return m;
  });
  VectorField b(2, [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    Vec<S> out(2);
    out[0] = S{0.2} + S{0.1} * x[1];
    out[1] = S{0.15} * x[0];
    return out;
  });
  return MetricSpec::randers(a, b, ChartDomain::box({-1.5, -1.5}, {1.5, 1.5}), "randers_curved");
}

MetricSpec sphere2(double half = 6.0) {
  return MetricSpec::riemannian(MatrixField::sphere_chart(2),
                                ChartDomain::box({-half, -half}, {half, half}), "sphere");
}

VectorField poly_x(int which) {
  if (which == 0)
    return poly_vector_field({Polynomial{2, {{0.8, {0, 0}}, {0.3, {0, 1}}}},
                              Polynomial{2, {{-0.4, {0, 0}}, {0.2, {1, 0}}}}});
  return poly_vector_field({Polynomial{2, {{0.1, {0, 0}}, {0.5, {1, 0}}}},
                            Polynomial{2, {{0.9, {0, 0}}, {-0.2, {0, 2}}}}});
}

}  // namespace

TEST_CASE("berwald connection: euclidean zero, riemannian equals Levi-Civita, 0-homogeneous") {
  auto euc = MetricSpec::euclidean(ChartDomain::box({-2, -2}, {2, 2}));
  auto bc_euc = berwald_connection(spray_from_metric(euc));
  CHECK(max_abs(bc_euc.christoffel(TangentSample({0.3, 0.0}, {1.0, 0.4}))) == doctest::Approx(0.0));

  auto sph = sphere2();
  auto bc = berwald_connection(spray_from_metric(sph));
  bc.validate();
  auto samples = draw_samples(sph.domain(), 15, 3);
  for (const auto& s : samples) {
    VecD flat = bc.christoffel(s);
    auto lc = testing::levi_civita(sph.coefficient_matrix(), s.x);
    double scale = std::max(1.0, max_abs(lc));
    for (size_t q = 0; q < flat.size(); ++q) CHECK(std::fabs(flat[q] - lc[q]) < 1e-6 * scale);

    VecD v2 = s.v;
    for (auto& c : v2) c *= 2.0;
    VecD flat2 = bc.christoffel<0>(s.x, v2);
    for (size_t q = 0; q < flat.size(); ++q) CHECK(std::fabs(flat[q] - flat2[q]) < 1e-8);
  }
}

TEST_CASE("berwald symbols contract to the spray (euler identity)") {
  auto metric = randers_curved();
  auto spray = spray_from_metric(metric);
  auto bc = berwald_connection(spray);
  for (const auto& s : draw_samples(metric.domain(), 50, 23)) {
    VecD flat = bc.christoffel(s);
    VecD g = spray.coefficients(s);
    const int n = 2;
    double scale = std::max(1.0, max_abs(g));
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += bc.symbol(flat, k, i, j) * s.v[i] * s.v[j];
      CHECK(std::fabs(acc - g[k]) < 1e-8 * scale);
    }
  }
}

TEST_CASE("chern connection: riemannian reduction, euclidean zero, metric compatibility") {
  auto sph = sphere2();
  auto cc = chern_connection(sph);
  cc.validate();
  for (const auto& s : draw_samples(sph.domain(), 10, 5)) {
    VecD flat = cc.christoffel(s);
    auto lc = testing::levi_civita(sph.coefficient_matrix(), s.x);
    double scale = std::max(1.0, max_abs(lc));
    for (size_t q = 0; q < flat.size(); ++q) CHECK(std::fabs(flat[q] - lc[q]) < 1e-6 * scale);
  }

  auto euc = MetricSpec::euclidean(ChartDomain::box({-2, -2}, {2, 2}));
  CHECK(max_abs(chern_connection(euc).christoffel(TangentSample({0.1, 0.2}, {0.5, 1.0}))) ==
        doctest::Approx(0.0));

  // nabla g = 0 and nabla L = 0 with seeded extensions on a curved randers
  // metric
  auto metric = randers_curved();
  auto chern = chern_connection(metric);
  auto g_field = fundamental_tensor_field(metric);
  auto l_field = AnisotropicTensorField::from_scalar(metric.lagrangian());
  auto x_field = poly_x(0);
  int k = 0;
  for (const auto& s : draw_samples(metric.domain(), 100, 7)) {
    auto ext = make_extension(s, ExtensionMode::linear, 50 + static_cast<uint64_t>(k++));
    TensorValue ng = covariant_derivative_tensor(chern, x_field, g_field, s, ext);
    CHECK(max_abs(ng) <= 1e-7);
    TensorValue nl = covariant_derivative_tensor(chern, x_field, l_field, s, ext);
    CHECK(max_abs(nl) <= 1e-7);
  }
}

TEST_CASE("chern uniqueness probe: geodesic-preserving perturbation breaks metricity") {
  auto metric = randers_curved();
  auto chern = chern_connection(metric);
  SeededRng rng(31);
  VecD cvec(8);
  for (auto& e : cvec) e = rng.uniform(-1.0, 1.0);
  // symmetrize the random tensor in its two lower slots
  for (int i = 0; i < 2; ++i) {
    size_t a01 = (static_cast<size_t>(i) * 2 + 0) * 2 + 1;
    size_t a10 = (static_cast<size_t>(i) * 2 + 1) * 2 + 0;
    double m = 0.5 * (cvec[a01] + cvec[a10]);
    cvec[a01] = m;
    cvec[a10] = m;
  }

  // perturbation S^i_jk = c^i_jk - c^i_pq v^p v^q v_j v_k / (v.v)^2 keeps
  // S(v,v) = 0, so the perturbed connection has the same geodesics
  auto perturbed = AnisotropicConnection(
      metric.domain(),
      [chern, cvec](const auto& x, const auto& v) {
        using S = std::decay_t<decltype(x[0])>;
        constexpr int K = level_of<S>;
        Vec<S> flat = chern.christoffel<K>(x, v);
        const int n = 2;
        S vv{};
        for (int i = 0; i < n; ++i) vv += v[i] * v[i];
        for (int i = 0; i < n; ++i) {
          S svv{};
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
              svv += S{cvec[(static_cast<size_t>(i) * n + j) * n + k]} * v[j] * v[k];
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              size_t q = (static_cast<size_t>(i) * n + j) * n + k;
              S pert = S{cvec[q]} - svv * v[j] * v[k] / (vv * vv);
              flat[q] += S{1e-2} * pert;
            }
        }
        return flat;
      },
      /*torsion_free=*/false, "perturbed_chern");

  auto g_field = fundamental_tensor_field(metric);
  auto x_field = poly_x(1);
  double worst = 0.0;
  for (const auto& s : draw_samples(metric.domain(), 10, 77)) {
    TensorValue ng = covariant_derivative_tensor(perturbed, x_field, g_field, s);
    worst = std::max(worst, max_abs(ng));
    // the perturbation leaves the spray alone
    VecD f = perturbed.christoffel(s);
    VecD f0 = chern.christoffel(s);
    double contract_diff = 0.0;
    for (int i = 0; i < 2; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          acc += (f[(static_cast<size_t>(i) * 2 + j) * 2 + k] -
                  f0[(static_cast<size_t>(i) * 2 + j) * 2 + k]) *
                 s.v[j] * s.v[k];
      contract_diff = std::max(contract_diff, std::fabs(acc));
    }
    CHECK(contract_diff < 1e-12);
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("covariant derivative of vector fields: constants, torsion identity, oracle") {
  auto euc = MetricSpec::euclidean(ChartDomain::box({-2, -2}, {2, 2}));
  auto ce = chern_connection(euc);
  TangentSample s({0.3, 0.1}, {1.0, -0.5});
  CHECK(max_abs(covariant_derivative_vector(ce, s, poly_x(0), VectorField::constant({1.0, 2.0}))) ==
        doctest::Approx(0.0));

  auto metric = randers_curved();
  auto chern = chern_connection(metric);
  auto xf = poly_x(0), yf = poly_x(1);
  for (const auto& sm : draw_samples(metric.domain(), 20, 11)) {
    VecD xy = covariant_derivative_vector(chern, sm, xf, yf);
    VecD yx = covariant_derivative_vector(chern, sm, yf, xf);
    MatD jx = xf.jacobian(sm.x), jy = yf.jacobian(sm.x);
    VecD bracket = matvec(jy, xf(sm.x));
    VecD tmp = matvec(jx, yf(sm.x));
    for (size_t i = 0; i < bracket.size(); ++i) bracket[i] -= tmp[i];
    for (size_t i = 0; i < bracket.size(); ++i)
      CHECK(xy[i] - yx[i] == doctest::Approx(bracket[i]).epsilon(1e-8));
  }

  auto sph = sphere2();
  auto cs = chern_connection(sph);
  for (const auto& sm : draw_samples(sph.domain(), 10, 13)) {
    VecD got = covariant_derivative_vector(cs, sm, xf, yf);
    auto lc = testing::levi_civita(sph.coefficient_matrix(), sm.x);
    MatD jy = yf.jacobian(sm.x);
    VecD xv = xf(sm.x), yv = yf(sm.x);
    VecD expect = matvec(jy, xv);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          expect[i] += xv[j] * yv[k] * lc[(static_cast<size_t>(i) * 2 + j) * 2 + k];
    for (int i = 0; i < 2; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
}

TEST_CASE("covariant derivative is function-linear in X and Leibniz in Y") {
  auto metric = randers_curved();
  auto chern = chern_connection(metric);
  auto xf = poly_x(0), yf = poly_x(1);
  Polynomial f{2, {{0.6, {0, 0}}, {0.3, {1, 1}}}};
  VectorField fx(2, [f, xf](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto a = xf.eval<level_of<S>>(x);
    S fv = f.eval(x);
    for (auto& c : a) c *= fv;
    return a;
  });
  VectorField fy(2, [f, yf](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    auto a = yf.eval<level_of<S>>(x);
    S fv = f.eval(x);
    for (auto& c : a) c *= fv;
    return a;
  });
  for (const auto& s : draw_samples(metric.domain(), 15, 17)) {
    double fv = f.eval(s.x);
    VecD base = covariant_derivative_vector(chern, s, xf, yf);
    VecD lin = covariant_derivative_vector(chern, s, fx, yf);
    for (size_t i = 0; i < lin.size(); ++i)
      CHECK(lin[i] == doctest::Approx(fv * base[i]).epsilon(1e-9).scale(1.0));

    VecD leib = covariant_derivative_vector(chern, s, xf, fy);
    Vec<Dual<double>> xd = promote(s.x, xf(s.x));
    double xf_f = f.eval(xd).b;  // X(f)
    VecD yv = yf(s.x);
    for (size_t i = 0; i < leib.size(); ++i)
      CHECK(leib[i] == doctest::Approx(xf_f * yv[i] + fv * base[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("covariant derivative along curves: geodesic velocity, euclidean, restriction") {
  auto sph = sphere2();
  auto chern = chern_connection(sph);
  auto curve = connection_geodesic(chern, {0.1, -0.2}, {0.6, 0.3}, {0.0, 1.0});
  REQUIRE(!curve.truncated());

  CurveField vel = CurveField::velocity_of(curve);
  for (double t : {0.1, 0.5, 0.9}) {
    TangentSample v(curve.position(t), curve.velocity(t));
    CHECK(max_abs(covariant_derivative_along_curve(chern, curve, vel, t, v)) < 1e-7);
  }

  auto euc = MetricSpec::euclidean(ChartDomain::box({-3, -3}, {3, 3}));
  auto ce = chern_connection(euc);
  auto line = connection_geodesic(ce, {0.0, 0.0}, {0.4, 0.1}, {0.0, 1.0});
  CurveField wob = CurveField::from_function([](double t) { return VecD{t * t, std::sin(t)}; });
  VecD d = covariant_derivative_along_curve(ce, line, wob, 0.3,
                                            TangentSample(line.position(0.3), {1.0, 0.2}));
  CHECK(d[0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(d[1] == doctest::Approx(std::cos(0.3)).epsilon(1e-7));

  // restriction consistency: D_gamma^v X = nabla^v_{gammadot} X for chart fields
  auto xf = poly_x(1);
  CurveField restr = CurveField::restriction(xf, curve);
  for (double t : {0.2, 0.7}) {
    TangentSample v(curve.position(t), curve.velocity(t));
    VecD along = covariant_derivative_along_curve(chern, curve, restr, t, v);
    VectorField gammadot = VectorField::constant(curve.velocity(t));
    VecD direct = covariant_derivative_vector(chern, v, gammadot, xf);
    for (size_t i = 0; i < along.size(); ++i)
      CHECK(along[i] == doctest::Approx(direct[i]).epsilon(1e-8));
  }
}

TEST_CASE("connection geodesics: chern and berwald share geodesics; sphere great circle") {
  auto metric = randers_curved();
  auto chern = chern_connection(metric);
  auto berwald = berwald_connection(spray_from_metric(metric));
  auto c1 = connection_geodesic(chern, {0.2, -0.1}, {0.7, 0.4}, {0.0, 1.0});
  auto c2 = connection_geodesic(berwald, {0.2, -0.1}, {0.7, 0.4}, {0.0, 1.0});
  REQUIRE(!c1.truncated());
  REQUIRE(!c2.truncated());
  for (int k = 0; k <= 20; ++k) {
    double t = k / 20.0;
    VecD a = c1.position(t), b = c2.position(t);
    VecD diff(a.size());
    for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    CHECK(norm2(diff) <= 1e-6);
  }
  CHECK(connection_geodesic_residual(chern, c1) <= 1e-8);

  auto sph = sphere2();
  auto cs = chern_connection(sph);
  auto gc = connection_geodesic(cs, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.2});
  for (double t : {0.4, 0.8, 1.2})
    CHECK(norm2(gc.position(t)) == doctest::Approx(std::tan(t)).epsilon(1e-5));

  // geodesics of the metric's spray coincide with chern geodesics on [0, 1]
  auto spray_curve = integrate_geodesic(spray_from_metric(metric), {0.2, -0.1}, {0.7, 0.4},
                                        {0.0, 1.0});
  for (int k = 0; k <= 20; ++k) {
    double t = k / 20.0;
    VecD a = spray_curve.position(t), b = c1.position(t);
    VecD diff(a.size());
    for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    CHECK(norm2(diff) <= 1e-6);
  }
}

TEST_CASE("difference tensor: zero for equal connections, riemannian chern = berwald") {
  auto sph = sphere2();
  auto chern = chern_connection(sph);
  auto berwald = berwald_connection(spray_from_metric(sph));
  TangentSample s({0.4, 0.8}, {0.9, -0.3});
  CHECK(max_abs(difference_tensor(chern, chern, s)) == doctest::Approx(0.0));
  CHECK(max_abs(difference_tensor(chern, berwald, s)) < 1e-7);
}

TEST_CASE("vertical derivative of the difference tensor pins the first-slot contraction") {
  auto metric = randers_curved();
  auto chern = chern_connection(metric);
  auto berwald = berwald_connection(spray_from_metric(metric));
  auto dfield = difference_tensor_field(chern, berwald);
  auto ddfield = vertical_derivation(dfield);
  SeededRng rng(41);
  for (const auto& s : draw_samples(metric.domain(), 25, 43)) {
    VecD u = rng.unit_vector(2), w = rng.unit_vector(2);
    TensorValue dd = ddfield(s);    // (1,3): output; vertical, then the two slots
    TensorValue d = dfield(s);      // (1,2)
    for (int i = 0; i < 2; ++i) {
      double lhs = 0.0, rhs = 0.0;
      for (int m = 0; m < 2; ++m)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) lhs += dd.at({i, m, j, k}) * w[m] * s.v[j] * u[k];
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) rhs -= d.at({i, j, k}) * w[j] * u[k];
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7).scale(1.0));
    }
  }
}
