#include "finsler/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

#include "finsler/curvature.hpp"
#include "finsler/lie.hpp"
#include "finsler/sampling.hpp"
#include "finsler/version.hpp"

namespace finsler::cli {

namespace {

std::vector<std::string> standard_header(const ScenarioConfig& cfg, const std::string& command) {
  return {std::string("fincalc ") + kVersion, "command: " + command, "config: " + cfg.digest,
          "seed: " + std::to_string(cfg.seed)};
}

void append_indexed(std::vector<std::string>& cols, const std::string& stem, int dim, int rank) {
  size_t total = 1;
  for (int k = 0; k < rank; ++k) total *= static_cast<size_t>(dim);
  for (size_t f = 0; f < total; ++f) {
    std::string suffix(static_cast<size_t>(rank), '0');
    size_t rem = f;
    for (int k = rank - 1; k >= 0; --k) {
      suffix[static_cast<size_t>(k)] = static_cast<char>('0' + rem % static_cast<size_t>(dim));
      rem /= static_cast<size_t>(dim);
    }
    cols.push_back(stem + "_" + suffix);
  }
}

void push_all(std::vector<std::string>& row, const VecD& values) {
  for (double v : values) row.push_back(ResultTable::num(v));
}

void write_table(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file: " + path);
  table.write(out);
}

// ---------------------------------------------------------------- eval ----

VecD eval_sample_row(const ScenarioConfig& cfg, const SpraySpec& spray,
                     const AnisotropicConnection& chern, const AnisotropicConnection& berwald,
                     const TangentSample& s) {
  const int n = cfg.dimension;
  VecD row;
  row.reserve(64);
  for (double c : s.x) row.push_back(c);
  for (double c : s.v) row.push_back(c);
  row.push_back(evaluate_L(cfg.metric, s));
  MatD g = fundamental_tensor(cfg.metric, s).g;
  row.insert(row.end(), g.a.begin(), g.a.end());
  CartanTensorValue c = cartan_tensor(cfg.metric, s);
  row.insert(row.end(), c.c.begin(), c.c.end());
  VecD gcoef = spray.coefficients(s);
  row.insert(row.end(), gcoef.begin(), gcoef.end());
  MatD nmat = nonlinear_coefficients(spray, s);
  row.insert(row.end(), nmat.a.begin(), nmat.a.end());
  VecD gb = berwald.christoffel(s);
  row.insert(row.end(), gb.begin(), gb.end());
  VecD gc = chern.christoffel(s);
  row.insert(row.end(), gc.begin(), gc.end());
  VerticalDerivValue p = vertical_derivative_connection(chern, s);
  row.insert(row.end(), p.p.c.begin(), p.p.c.end());
  VerticalDerivValue b = berwald_tensor(spray, s);
  row.insert(row.end(), b.p.c.begin(), b.p.c.end());
  CurvatureValue r = curvature_tensor(chern, s);
  row.insert(row.end(), r.r.c.begin(), r.r.c.end());
  TensorValue lan = landsberg_tensor_full(cfg.metric, s);
  row.insert(row.end(), lan.c.begin(), lan.c.end());
  (void)n;
  return row;
}

int eval_command(const ScenarioConfig& cfg, const RunOptions& opt) {
  const int n = cfg.dimension;
  std::vector<std::string> cols{"idx"};
  append_indexed(cols, "x", n, 1);
  append_indexed(cols, "v", n, 1);
  cols.push_back("L");
  append_indexed(cols, "g", n, 2);
  append_indexed(cols, "C", n, 3);
  append_indexed(cols, "G", n, 1);
  append_indexed(cols, "N", n, 2);
  append_indexed(cols, "GammaB", n, 3);
  append_indexed(cols, "GammaC", n, 3);
  append_indexed(cols, "P", n, 4);
  append_indexed(cols, "B", n, 4);
  append_indexed(cols, "R", n, 4);
  append_indexed(cols, "Lan", n, 3);

  ResultTable table(cols);
  for (const auto& line : standard_header(cfg, "eval")) table.add_header(line);

  auto spray = spray_from_metric(cfg.metric);
  auto chern = chern_connection(cfg.metric);
  auto berwald = berwald_connection(spray);
  auto samples = cfg.samples();

  std::vector<VecD> rows(samples.size());
  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    for (size_t k = 0; k < samples.size(); ++k)
      rows[k] = eval_sample_row(cfg, spray, chern, berwald, samples[k]);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<size_t> next{0};
    for (int w = 0; w < jobs; ++w)
      futures.push_back(std::async(std::launch::async, [&] {
        for (;;) {
          size_t k = next.fetch_add(1);
          if (k >= samples.size()) return;
          rows[k] = eval_sample_row(cfg, spray, chern, berwald, samples[k]);
        }
      }));
    for (auto& f : futures) f.get();
  }

  for (size_t k = 0; k < samples.size(); ++k) {
    std::vector<std::string> row{std::to_string(k)};
    push_all(row, rows[k]);
    table.add_row(std::move(row));
  }
  write_table(table, opt.output_path);
  return kExitOk;
}

// ------------------------------------------------------------ geodesic ----

int geodesic_command(const ScenarioConfig& cfg, const RunOptions& opt) {
  if (!cfg.geodesic) throw ConfigError("geodesic command needs a 'geodesic' config block");
  const auto& req = *cfg.geodesic;
  auto spray = spray_from_metric(cfg.metric);
  CurveSamples curve = integrate_geodesic(spray, req.x0, req.v0, {req.t_begin, req.t_end},
                                          cfg.tolerances.integration);

  std::vector<std::string> cols{"t"};
  append_indexed(cols, "x", cfg.dimension, 1);
  append_indexed(cols, "v", cfg.dimension, 1);
  cols.push_back("L");
  ResultTable table(cols);
  for (const auto& line : standard_header(cfg, "geodesic")) table.add_header(line);
  if (curve.truncated())
    table.add_header("truncated: exit_time=" + ResultTable::num(*curve.exit_time()));

  double t_last = curve.t_end();
  for (int k = 0; k < req.points; ++k) {
    double t = req.t_begin + (t_last - req.t_begin) * k / (req.points - 1);
    std::vector<std::string> row{ResultTable::num(t)};
    push_all(row, curve.position(t));
    push_all(row, curve.velocity(t));
    row.push_back(ResultTable::num(evaluate_L(cfg.metric, curve.sample(t))));
    table.add_row(std::move(row));
  }
  write_table(table, opt.output_path);
  return kExitOk;
}

// -------------------------------------------------------------- jacobi ----

int jacobi_command(const ScenarioConfig& cfg, const RunOptions& opt) {
  if (!cfg.jacobi) throw ConfigError("jacobi command needs a 'jacobi' config block");
  const auto& req = *cfg.jacobi;
  auto chern = chern_connection(cfg.metric);
  CurveSamples geo = connection_geodesic(chern, req.x0, req.v0, {req.t_begin, req.t_end},
                                         cfg.tolerances.integration);
  double t_last = geo.t_end();
  JacobiField jf = integrate_jacobi(chern, geo, req.j0, req.j0_dot, {req.t_begin, t_last},
                                    cfg.tolerances.integration);

  std::vector<std::string> cols{"t"};
  append_indexed(cols, "x", cfg.dimension, 1);
  append_indexed(cols, "J", cfg.dimension, 1);
  append_indexed(cols, "DJ", cfg.dimension, 1);
  cols.push_back("Jnorm_g");
  ResultTable table(cols);
  for (const auto& line : standard_header(cfg, "jacobi")) table.add_header(line);
  if (geo.truncated())
    table.add_header("truncated: exit_time=" + ResultTable::num(*geo.exit_time()));

  for (int k = 0; k < req.points; ++k) {
    double t = req.t_begin + (t_last - req.t_begin) * k / (req.points - 1);
    std::vector<std::string> row{ResultTable::num(t)};
    push_all(row, geo.position(t));
    VecD j = jf.value(t);
    push_all(row, j);
    push_all(row, jf.covariant_derivative(t));
    MatD g = fundamental_tensor(cfg.metric, geo.sample(t)).g;
    row.push_back(ResultTable::num(std::sqrt(std::fabs(bilinear(g, j, j)))));
    table.add_row(std::move(row));
  }
  write_table(table, opt.output_path);
  return kExitOk;
}

// ----------------------------------------------------------------- lie ----

int lie_command(const ScenarioConfig& cfg, const RunOptions& opt) {
  if (!cfg.lie_field) throw ConfigError("lie command needs a 'lie' config block");
  const int n = cfg.dimension;
  auto samples = cfg.samples();

  std::vector<std::string> cols{"idx"};
  append_indexed(cols, "x", n, 1);
  append_indexed(cols, "v", n, 1);
  cols.push_back("lie_L");
  append_indexed(cols, "lie_g", n, 2);
  ResultTable table(cols);
  for (const auto& line : standard_header(cfg, "lie")) table.add_header(line);

  KillingReport report = killing_check(cfg.lie_field, cfg.metric, samples);
  table.add_header(std::string("killing: ") + (report.is_killing ? "true" : "false") +
                   " max_residual=" + ResultTable::num(report.max_residual));
  table.add_header(std::string("conformal: ") + (report.is_conformal ? "true" : "false") +
                   " spread=" + ResultTable::num(report.conformal_spread));

  for (size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    std::vector<std::string> row{std::to_string(k)};
    push_all(row, s.x);
    push_all(row, s.v);
    row.push_back(ResultTable::num(lie_derivative_metric(cfg.lie_field, cfg.metric, s)));
    TensorValue lg = lie_derivative_fundamental(cfg.lie_field, cfg.metric, s);
    push_all(row, lg.c);
    table.add_row(std::move(row));
  }
  write_table(table, opt.output_path);
  return kExitOk;
}

// --------------------------------------------------------------- check ----

struct CheckAccum {
  ResultTable table{{"property", "max_residual", "tolerance", "pass", "gating"}};
  bool all_passed = true;

  void add(const std::string& name, double residual, double tol, bool gating = true,
           bool negative_control = false) {
    bool ok = negative_control ? residual > tol : residual <= tol;
    if (gating && !ok) all_passed = false;
    table.add_row({name, ResultTable::num(residual), ResultTable::num(tol), ok ? "1" : "0",
                   gating ? "1" : "0"});
  }
};

double fd_central(const std::function<double(double)>& f, double h) {
  double coarse = (f(h) - f(-h)) / (2 * h);
  double fine = (f(h / 2) - f(-h / 2)) / h;
  return (4 * fine - coarse) / 3.0;
}

}  // namespace

ResultTable run_checks(const ScenarioConfig& cfg, double suite_tol, bool* all_passed) {
  const int n = cfg.dimension;
  const auto& metric = cfg.metric;
  auto samples = cfg.samples();
  auto spray = spray_from_metric(metric);
  auto chern = chern_connection(metric);
  auto berwald = berwald_connection(spray);
  const bool anisotropic = metric.kind() == MetricKind::randers ||
                           metric.kind() == MetricKind::quartic ||
                           metric.kind() == MetricKind::custom;
  SeededRng rng(cfg.seed ^ 0xabcdef);
  CheckAccum acc;

  auto unit_dirs = [&](const TangentSample& s) {
    VecD u = rng.unit_vector(n), w = rng.unit_vector(n), z = rng.unit_vector(n);
    (void)s;
    return std::array<VecD, 3>{u, w, z};
  };

  // metric-level identities over all samples
  {
    double r_hom = 0, r_gvv = 0, r_ghom = 0, r_chom = 0, r_cv = 0, r_dl = 0, r_dg = 0;
    auto l_field = AnisotropicTensorField::from_scalar(metric.lagrangian());
    auto dl_field = vertical_derivation(l_field);
    auto g_field = fundamental_tensor_field(metric);
    auto dg_field = vertical_derivation(g_field);
    for (const auto& s : samples) {
      double l = evaluate_L(metric, s);
      MatD g = fundamental_tensor(metric, s).g;
      CartanTensorValue c = cartan_tensor(metric, s);
      for (double lam : {0.5, 2.0, 10.0}) {
        VecD vs = s.v;
        for (auto& e : vs) e *= lam;
        r_hom = std::max(r_hom, std::fabs(metric.lagrangian()(s.x, vs) - lam * lam * l) /
                                    (lam * lam * std::fabs(l)));
      }
      r_gvv = std::max(r_gvv, std::fabs(bilinear(g, s.v, s.v) - l) / std::max(1.0, std::fabs(l)));
      double gs = std::max(1.0, max_abs(g.a)), cs = std::max(1.0, max_abs(c.c));
      for (double lam : {0.5, 2.0}) {
        VecD vs = s.v;
        for (auto& e : vs) e *= lam;
        TangentSample sl(s.x, vs);
        MatD gl = fundamental_tensor(metric, sl).g;
        CartanTensorValue cl = cartan_tensor(metric, sl);
        for (size_t q = 0; q < g.a.size(); ++q)
          r_ghom = std::max(r_ghom, std::fabs(gl.a[q] - g.a[q]) / gs);
        for (size_t q = 0; q < c.c.size(); ++q)
          r_chom = std::max(r_chom, std::fabs(cl.c[q] - c.c[q] / lam) / cs);
      }
      for (int u = 0; u < n; ++u)
        for (int w = 0; w < n; ++w) {
          double cv = 0.0;
          for (int i = 0; i < n; ++i) cv += c(i, u, w) * s.v[i];
          r_cv = std::max(r_cv, std::fabs(cv) / cs);
        }
      TensorValue dl = dl_field(s);
      for (int w = 0; w < n; ++w) {
        double gvw = 0.0;
        for (int i = 0; i < n; ++i) gvw += g(i, w) * s.v[i];
        r_dl = std::max(r_dl, std::fabs(dl.at({w}) - 2.0 * gvw) / gs);
      }
      TensorValue dg = dg_field(s);
      for (int k = 0; k < n; ++k)
        for (int u = 0; u < n; ++u)
          for (int w = 0; w < n; ++w)
            r_dg = std::max(r_dg, std::fabs(dg.at({k, u, w}) - 2.0 * c(k, u, w)) / cs);
    }
    acc.add("lagrangian_homogeneity", r_hom, 1e-9);
    acc.add("euler_g_vv_equals_L", r_gvv, 1e-8);
    acc.add("g_homogeneity", r_ghom, 1e-8);
    acc.add("cartan_homogeneity", r_chom, 1e-8);
    acc.add("cartan_v_contraction", r_cv, 1e-8);
    acc.add("vertical_L_equals_2gv", r_dl, 1e-8);
    acc.add("vertical_g_equals_2C", r_dg, 1e-8);
  }

  // spray identities
  {
    double r_nv = 0, r_bvv = 0, r_shom = 0;
    for (const auto& s : samples) {
      VecD gc = spray.coefficients(s);
      MatD nm = nonlinear_coefficients(spray, s);
      VecD nv = matvec(nm, s.v);
      double gs = std::max(1.0, max_abs(gc));
      for (int i = 0; i < n; ++i) r_nv = std::max(r_nv, std::fabs(nv[i] - gc[i]) / gs);
      VecD flat = berwald.christoffel(s);
      for (int k = 0; k < n; ++k) {
        double acc2 = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) acc2 += berwald.symbol(flat, k, i, j) * s.v[i] * s.v[j];
        r_bvv = std::max(r_bvv, std::fabs(acc2 - gc[k]) / gs);
      }
      for (double lam : {0.5, 2.0}) {
        VecD vs = s.v;
        for (auto& e : vs) e *= lam;
        VecD gl = spray.coefficients<0>(s.x, vs);
        for (int i = 0; i < n; ++i)
          r_shom = std::max(r_shom, std::fabs(gl[i] - lam * lam * gc[i]) / gs);
      }
    }
    acc.add("euler_Nv_equals_G", r_nv, 1e-8);
    acc.add("berwald_vv_equals_G", r_bvv, 1e-8);
    acc.add("spray_homogeneity", r_shom, 1e-9);
  }

  // differentiation engine: mixed partials and AD vs FD
  {
    double r_sym = 0, r_fd = 0;
    const auto& lag = metric.lagrangian();
    for (const auto& s : samples) {
      VecD z1 = rng.unit_vector(n), z2 = rng.unit_vector(n), u = rng.unit_vector(n);
      double d12 = fiber_derivative(lag, s, std::array<VecD, 2>{z1, z2});
      double d21 = fiber_derivative(lag, s, std::array<VecD, 2>{z2, z1});
      r_sym = std::max(r_sym, std::fabs(d12 - d21) / std::max(1.0, std::fabs(d12)));
      double h = 1e-4 * std::max(1.0, norm2(s.v));
      double fd1 = fd_central(
          [&](double t) {
            VecD vt = s.v;
            for (int i = 0; i < n; ++i) vt[i] += t * z1[i];
            return lag(s.x, vt);
          },
          h);
      double ad1 = fiber_derivative(lag, s, std::array<VecD, 1>{z1});
      r_fd = std::max(r_fd, std::fabs(ad1 - fd1) / std::max(1.0, std::fabs(ad1)));
      // symmetric 4-point stencil for the mixed second derivative; a larger
      // step keeps the eps/h^2 roundoff floor below the first-order noise
      double h2 = 2e-3 * std::max(1.0, norm2(s.v));
      auto mixed2 = [&](double step) {
        auto at = [&](double t1, double t2) {
          VecD vt = s.v;
          for (int i = 0; i < n; ++i) vt[i] += t1 * z1[i] + t2 * z2[i];
          return lag(s.x, vt);
        };
        return (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) /
               (4.0 * step * step);
      };
      double fd2 = (4.0 * mixed2(h2 / 2) - mixed2(h2)) / 3.0;
      r_fd = std::max(r_fd, std::fabs(d12 - fd2) / std::max(1.0, std::fabs(d12)));
      double fdb = fd_central(
          [&](double t) {
            VecD xt = s.x;
            for (int i = 0; i < n; ++i) xt[i] += t * u[i];
            return lag(xt, s.v);
          },
          h);
      double adb = base_derivative(lag, s, u);
      r_fd = std::max(r_fd, std::fabs(adb - fdb) / std::max(1.0, std::fabs(adb)));
    }
    acc.add("fiber_mixed_partial_symmetry", r_sym, 1e-9);
    acc.add("ad_fd_agreement", r_fd, cfg.tolerances.derivative);
  }

  // vertical derivation algebra on tensor fields
  {
    auto g_field = fundamental_tensor_field(metric);
    auto ginv_field = inverse_fundamental_tensor_field(metric);
    auto prod = tensor_product(ginv_field, g_field);
    auto dprod = vertical_derivation(prod);
    auto mixed = contract(prod, 1, 0);
    auto route1 = vertical_derivation(mixed);
    auto route2 = contract(vertical_derivation(prod), 1, 1);
    double r_leib = 0, r_comm = 0;
    size_t cap = std::min<size_t>(samples.size(), 10);
    for (size_t k = 0; k < cap; ++k) {
      const auto& s = samples[k];
      TensorValue lhs = dprod(s);
      TensorValue da = vertical_derivation(ginv_field)(s);
      TensorValue vb = g_field(s);
      TensorValue va = ginv_field(s);
      TensorValue db = vertical_derivation(g_field)(s);
      double scale = std::max(1.0, max_abs(lhs));
      for (int a1 = 0; a1 < n; ++a1)
        for (int a2 = 0; a2 < n; ++a2)
          for (int kk = 0; kk < n; ++kk)
            for (int j1 = 0; j1 < n; ++j1)
              for (int j2 = 0; j2 < n; ++j2) {
                double rhs = da.at({a1, a2, kk}) * vb.at({j1, j2}) +
                             va.at({a1, a2}) * db.at({kk, j1, j2});
                r_leib = std::max(r_leib,
                                  std::fabs(lhs.at({a1, a2, kk, j1, j2}) - rhs) / scale);
              }
      TensorValue r1 = route1(s), r2 = route2(s);
      double scale2 = std::max(1.0, max_abs(r1));
      for (size_t q = 0; q < r1.c.size(); ++q)
        r_comm = std::max(r_comm, std::fabs(r1.c[q] - r2.c[q]) / scale2);
    }
    acc.add("vertical_derivation_leibniz", r_leib, 1e-8);
    acc.add("vertical_contract_commute", r_comm, 1e-8);
  }

  // chern characterization
  {
    auto g_field = fundamental_tensor_field(metric);
    auto l_field = AnisotropicTensorField::from_scalar(metric.lagrangian());
    auto x_field = poly_vector_field([n, &rng] {
      std::vector<Polynomial> comps;
      for (int i = 0; i < n; ++i) {
        Polynomial p{n, {}};
        PolyTerm c0{rng.uniform(-0.6, 0.6), std::vector<int>(static_cast<size_t>(n), 0)};
        PolyTerm c1{rng.uniform(-0.4, 0.4), std::vector<int>(static_cast<size_t>(n), 0)};
        c1.powers[static_cast<size_t>((i + 1) % n)] = 1;
        p.terms = {c0, c1};
        comps.push_back(std::move(p));
      }
      return comps;
    }());
    double r_sym = 0, r_ng = 0, r_nl = 0;
    int k = 0;
    for (const auto& s : samples) {
      VecD flat = chern.christoffel(s);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a)
          for (int b = a + 1; b < n; ++b)
            r_sym = std::max(r_sym,
                             std::fabs(chern.symbol(flat, i, a, b) - chern.symbol(flat, i, b, a)));
      auto ext = make_extension(s, ExtensionMode::linear, cfg.seed + 17 + static_cast<uint64_t>(k++));
      r_ng = std::max(r_ng, max_abs(covariant_derivative_tensor(chern, x_field, g_field, s, ext)));
      r_nl = std::max(r_nl, max_abs(covariant_derivative_tensor(chern, x_field, l_field, s, ext)));
    }
    acc.add("chern_symbol_symmetry", r_sym, 1e-10);
    acc.add("chern_nabla_g", r_ng, suite_tol);
    acc.add("chern_nabla_L", r_nl, suite_tol);

    // negative control: a geodesic-preserving perturbation breaks nabla g = 0
    VecD cvec(static_cast<size_t>(n) * n * n);
    for (auto& e : cvec) e = rng.uniform(-1.0, 1.0);
    auto perturbed = AnisotropicConnection(
        metric.domain(),
        [chern, cvec, n](const auto& x, const auto& v) {
          using S = std::decay_t<decltype(x[0])>;
          constexpr int K = level_of<S>;
          Vec<S> flat = chern.christoffel<K>(x, v);
          S vv{};
          for (int i = 0; i < n; ++i) vv += v[i] * v[i];
          for (int i = 0; i < n; ++i) {
            S svv{};
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b)
                svv += S{cvec[(static_cast<size_t>(i) * n + a) * n + b]} * v[a] * v[b];
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b) {
                size_t q = (static_cast<size_t>(i) * n + a) * n + b;
                flat[q] += S{1e-2} * (S{cvec[q]} - svv * v[a] * v[b] / (vv * vv));
              }
          }
          return flat;
        },
        false, "perturbed");
    double r_neg = 0;
    size_t cap = std::min<size_t>(samples.size(), 10);
    for (size_t q = 0; q < cap; ++q)
      r_neg = std::max(r_neg,
                       max_abs(covariant_derivative_tensor(perturbed, x_field, g_field, samples[q])));
    acc.add("perturbed_connection_breaks_metricity", r_neg, 1e-3, true, /*negative=*/true);
  }

  // curvature identities (capped sample count; each sample costs symbol towers)
  {
    size_t cap = std::min<size_t>(samples.size(), 25);
    double r_anti = 0, r_cyclic = 0, r_printed_vs_rzu = 0, r_ext = 0, r_dep = 0;
    double r_psym = 0, r_vprop = 0, r_pvert = 0, r_bv = 0, r_dvert = 0, r_land = 0;
    auto dfield = difference_tensor_field(chern, berwald);
    auto ddfield = vertical_derivation(dfield);
    for (size_t k = 0; k < cap; ++k) {
      const auto& s = samples[k];
      auto [u, w, z] = unit_dirs(s);
      CurvatureValue rv = curvature_tensor(chern, s);
      double scale = std::max(1.0, max_abs(rv.r));
      VecD ruw = rv.apply(u, w, z), rwu = rv.apply(w, u, z);
      VecD rwz = rv.apply(w, z, u), rzu = rv.apply(z, u, w);
      for (int i = 0; i < n; ++i) {
        r_anti = std::max(r_anti, std::fabs(ruw[i] + rwu[i]) / scale);
        r_cyclic = std::max(r_cyclic, std::fabs(ruw[i] + rwz[i] + rzu[i]) / scale);
        r_printed_vs_rzu =
            std::max(r_printed_vs_rzu, std::fabs((ruw[i] + rwu[i] + rzu[i]) - rzu[i]) / scale);
      }
      VecD op0 = curvature_tensor_operator_route(chern, make_extension(s, ExtensionMode::constant),
                                                 s, u, w, z);
      VecD op1 = curvature_tensor_operator_route(
          chern, make_extension(s, ExtensionMode::linear, cfg.seed + 100 + k), s, u, w, z);
      VecD op2 = curvature_tensor_operator_route(
          chern, make_extension(s, ExtensionMode::linear, cfg.seed + 200 + k), s, u, w, z);
      VecD sym = rv.apply(u, w, z);
      for (int i = 0; i < n; ++i) {
        r_ext = std::max(r_ext, std::fabs(sym[i] - op0[i]) / scale);
        r_ext = std::max(r_ext, std::fabs(sym[i] - op1[i]) / scale);
        r_ext = std::max(r_ext, std::fabs(sym[i] - op2[i]) / scale);
      }
      if (anisotropic) {
        VecD a1 = affine_curvature(chern, make_extension(s, ExtensionMode::linear, cfg.seed + 300 + k),
                                   s, u, w, z);
        VecD a2 = affine_curvature(chern, make_extension(s, ExtensionMode::linear, cfg.seed + 400 + k),
                                   s, u, w, z);
        double d = 0;
        for (int i = 0; i < n; ++i) d = std::max(d, std::fabs(a1[i] - a2[i]));
        r_dep = std::max(r_dep, d);
      }

      VerticalDerivValue p = vertical_derivative_connection(chern, s);
      double pscale = std::max(1.0, max_abs(p.p));
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int kk = 0; kk < n; ++kk)
              r_psym = std::max(r_psym,
                                std::fabs(p.p.at({l, i, j, kk}) - p.p.at({l, j, i, kk})) / pscale);
      r_vprop = std::max(r_vprop, vertical_property_residual(chern, s));
      r_vprop = std::max(r_vprop, vertical_property_residual(berwald, s));
      double vn = std::max(1.0, dot(s.v, s.v));
      r_pvert = std::max(r_pvert, max_abs(p.apply(u, w, s.v)) / (pscale * vn));
      VerticalDerivValue b = berwald_tensor(spray, s);
      double bscale = std::max(1.0, max_abs(b.p)) * vn;
      r_bv = std::max(r_bv, max_abs(b.apply(s.v, u, w)) / bscale);
      r_bv = std::max(r_bv, max_abs(b.apply(u, w, s.v)) / bscale);

      // vertical derivative of the difference tensor and the landsberg dual route
      TensorValue dd = ddfield(s);
      TensorValue d = dfield(s);
      double dscale = std::max(1.0, max_abs(d)) * vn;
      for (int i = 0; i < n; ++i) {
        double lhs = 0, rhs = 0;
        for (int m = 0; m < n; ++m)
          for (int a = 0; a < n; ++a)
            for (int bb = 0; bb < n; ++bb) lhs += dd.at({i, m, a, bb}) * w[m] * s.v[a] * u[bb];
        for (int a = 0; a < n; ++a)
          for (int bb = 0; bb < n; ++bb) rhs -= d.at({i, a, bb}) * w[a] * u[bb];
        r_dvert = std::max(r_dvert, std::fabs(lhs - rhs) / dscale);
      }
      MatD g = fundamental_tensor(metric, s).g;
      double route_b = 0.0;
      {
        VecD bv = b.apply(u, w, z);
        route_b = bilinear(g, bv, s.v);
      }
      VecD duw(static_cast<size_t>(n), 0.0);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a)
          for (int bb = 0; bb < n; ++bb) duw[i] += d.at({i, a, bb}) * u[a] * w[bb];
      double route_d = 2.0 * bilinear(g, duw, z);
      r_land = std::max(r_land,
                        std::fabs(route_b - route_d) / std::max(1.0, std::fabs(route_b)));
    }
    acc.add("curvature_antisymmetry", r_anti, 1e-8);
    acc.add("bianchi_cyclic", r_cyclic, 1e-7);
    acc.add("bianchi_as_printed_equals_Rzuw", r_printed_vs_rzu, 1e-10, /*gating=*/false);
    acc.add("curvature_extension_independence", r_ext, suite_tol);
    if (anisotropic) acc.add("affine_curvature_extension_dependence", r_dep, 1e-4, true, true);
    acc.add("chern_tensor_symmetry", r_psym, 1e-8);
    acc.add("vertical_property", r_vprop, kVerticalPropertyTolerance);
    acc.add("chern_tensor_vertical_v_null", r_pvert, suite_tol);
    acc.add("berwald_tensor_v_null", r_bv, suite_tol);
    acc.add("difference_tensor_vertical_derivative", r_dvert, suite_tol);
    acc.add("landsberg_dual_route", r_land, 1e-6);
  }

  // derivation engine invariants
  {
    size_t cap = std::min<size_t>(samples.size(), 15);
    VectorField x_field = n >= 2 ? VectorField::rotation(n) : VectorField::dilation(n);
    auto cov = covariant_derivation(chern, x_field);
    auto lie_inst = lie_derivation(x_field);
    auto g_field = fundamental_tensor_field(metric);
    double r_ext = 0;
    for (size_t k = 0; k < cap; ++k) {
      const auto& s = samples[k];
      for (const auto* d : {&cov, &lie_inst}) {
        TensorValue base = derive_tensor(*d, g_field, s, make_extension(s, ExtensionMode::constant));
        double scale = std::max(1.0, max_abs(base));
        for (uint64_t seed : {cfg.seed + 500 + k, cfg.seed + 600 + k}) {
          TensorValue other =
              derive_tensor(*d, g_field, s, make_extension(s, ExtensionMode::linear, seed));
          for (size_t q = 0; q < base.c.size(); ++q)
            r_ext = std::max(r_ext, std::fabs(base.c[q] - other.c[q]) / scale);
        }
      }
    }
    acc.add("derivation_extension_independence", r_ext, suite_tol);
  }

  // lie identities
  {
    size_t cap = std::min<size_t>(samples.size(), 15);
    VectorField x_field =
        cfg.lie_field ? cfg.lie_field : (n >= 2 ? VectorField::rotation(n) : VectorField::dilation(n));
    auto l_field = AnisotropicTensorField::from_scalar(metric.lagrangian());
    auto lie_inst = lie_derivation(x_field);
    double r_route = 0, r_g_route = 0;
    for (size_t k = 0; k < cap; ++k) {
      const auto& s = samples[k];
      double a = lie_derivative_metric(x_field, metric, s);
      double b = derive_tensor(lie_inst, l_field, s, make_extension(s, ExtensionMode::constant)).c[0];
      r_route = std::max(r_route, std::fabs(a - b) / std::max(1.0, std::fabs(a)));
      TensorValue lg = lie_derivative_fundamental(x_field, metric, s);
      TensorValue le = lie_derivative_tensor(x_field, fundamental_tensor_field(metric), s);
      double scale = std::max(1.0, max_abs(le));
      for (size_t q = 0; q < lg.c.size(); ++q)
        r_g_route = std::max(r_g_route, std::fabs(lg.c[q] - le.c[q]) / scale);
    }
    acc.add("lie_metric_route_agreement", r_route, 1e-8);
    acc.add("lie_fundamental_route_agreement", r_g_route, suite_tol);

    // flow-pullback oracle on a few samples
    size_t fcap = std::min<size_t>(samples.size(), 4);
    double r_flow = 0;
    auto g_field = fundamental_tensor_field(metric);
    for (size_t k = 0; k < fcap; ++k) {
      const auto& s = samples[k];
      TensorValue flow = flow_pullback_derivative(x_field, g_field, s, metric.domain().chart());
      TensorValue engine = lie_derivative_tensor(x_field, g_field, s);
      double scale = std::max(1.0, max_abs(engine));
      for (size_t q = 0; q < flow.c.size(); ++q)
        r_flow = std::max(r_flow, std::fabs(flow.c[q] - engine.c[q]) / scale);
    }
    acc.add("lie_flow_oracle_agreement", r_flow, 1e-5);
  }

  // geodesic-level consistency on a short arc from the first sample
  {
    const auto& s0 = samples.front();
    VecD v0 = s0.v;
    double speed = norm2(v0);
    for (auto& e : v0) e /= std::max(1.0, speed);
    double t_end = 0.3;
    auto curve_spray = integrate_geodesic(spray, s0.x, v0, {0.0, t_end},
                                          cfg.tolerances.integration);
    double t_cov = curve_spray.truncated() ? 0.8 * *curve_spray.exit_time() : t_end;
    if (t_cov > 1e-3) {
      auto curve_chern = connection_geodesic(chern, s0.x, v0, {0.0, t_cov},
                                             cfg.tolerances.integration);
      auto curve_berwald = connection_geodesic(berwald, s0.x, v0, {0.0, t_cov},
                                               cfg.tolerances.integration);
      double t_common = std::min({t_cov, curve_chern.t_end(), curve_berwald.t_end()});
      double r_consist = 0, r_reparam = 0, r_ops = 0, r_resid = 0;
      auto curve_fast = integrate_geodesic(spray, s0.x, [&] {
        VecD v2 = v0;
        for (auto& e : v2) e *= 2.0;
        return v2;
      }(), {0.0, t_common / 2.0}, cfg.tolerances.integration);
      for (int k = 0; k <= 10; ++k) {
        double t = t_common * k / 10.0;
        VecD a = curve_spray.position(t), b = curve_chern.position(t), c = curve_berwald.position(t);
        VecD d2 = curve_fast.position(t / 2.0);
        for (int i = 0; i < n; ++i) {
          r_consist = std::max(r_consist, std::fabs(a[i] - b[i]));
          r_consist = std::max(r_consist, std::fabs(a[i] - c[i]));
          r_reparam = std::max(r_reparam, std::fabs(a[i] - d2[i]));
        }
        if (k == 3 || k == 7) {
          VecD u = rng.unit_vector(n);
          VecD rc = curvature_operator(chern, curve_chern, t, u);
          VecD rb = curvature_operator(berwald, curve_chern, t, u);
          double scale = std::max(1.0, max_abs(rc));
          for (int i = 0; i < n; ++i) r_ops = std::max(r_ops, std::fabs(rc[i] - rb[i]) / scale);
        }
      }
      r_resid = geodesic_residual(spray, curve_spray);
      acc.add("spray_vs_connection_geodesics", r_consist, 1e-6);
      acc.add("geodesic_reparameterization", r_reparam, 1e-6);
      acc.add("jacobi_operators_chern_berwald", r_ops, 1e-6);
      acc.add("geodesic_midpoint_residual", r_resid, 10.0 * cfg.tolerances.integration);
    }
  }

  if (all_passed) *all_passed = acc.all_passed;
  return acc.table;
}

namespace {

int check_command(const ScenarioConfig& cfg, const RunOptions& opt) {
  bool all = false;
  ResultTable table = run_checks(cfg, cfg.tolerances.suite, &all);
  ResultTable out(table.columns());
  for (const auto& line : standard_header(cfg, "check")) out.add_header(line);
  for (const auto& row : table.rows()) out.add_row(row);
  write_table(out, opt.output_path);
  return all ? kExitOk : 1;
}

}  // namespace

int run_command(const RunOptions& options) {
  ScenarioConfig cfg = load_config(options.config_path);
  if (options.seed) cfg.seed = *options.seed;
  if (options.tol) cfg.tolerances.suite = *options.tol;
  if (options.output_path.empty()) throw UsageError("an --output path is required");

  if (options.command == "eval") return eval_command(cfg, options);
  if (options.command == "geodesic") return geodesic_command(cfg, options);
  if (options.command == "jacobi") return jacobi_command(cfg, options);
  if (options.command == "lie") return lie_command(cfg, options);
  if (options.command == "check") return check_command(cfg, options);
  throw ConfigError("unknown command '" + options.command +
                    "' (expected eval|geodesic|jacobi|lie|check)");
}

}  // namespace finsler::cli
