#include "finsler/cli/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "finsler/sampling.hpp"

namespace finsler::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

VecD get_vector(const json& j, const std::string& path, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    fail(path, "expected an array of " + std::to_string(dim) + " numbers");
  VecD out;
  for (const auto& e : j) {
    if (!e.is_number()) fail(path, "expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

Polynomial parse_poly(const json& j, const std::string& path, int dim) {
  Polynomial p;
  p.dim = dim;
  if (j.is_number()) return Polynomial::constant(dim, j.get<double>());
  if (!j.is_object() || !j.contains("terms")) fail(path, "expected a number or {\"terms\": [...]}");
  for (size_t k = 0; k < j["terms"].size(); ++k) {
    const auto& t = j["terms"][k];
    std::string tp = path + ".terms[" + std::to_string(k) + "]";
    if (!t.is_object() || !t.contains("c") || !t.contains("p")) fail(tp, "expected {c, p}");
    PolyTerm term;
    term.coef = get_number(t["c"], tp + ".c");
    if (!t["p"].is_array() || static_cast<int>(t["p"].size()) != dim)
      fail(tp + ".p", "expected " + std::to_string(dim) + " exponents");
    for (const auto& e : t["p"]) {
      if (!e.is_number_integer() || e.get<int>() < 0) fail(tp + ".p", "exponents must be >= 0");
      term.powers.push_back(e.get<int>());
    }
    p.terms.push_back(std::move(term));
  }
  return p;
}

MatrixField parse_matrix(const json& j, const std::string& path, int dim) {
  if (j.is_object() && j.contains("named")) {
    std::string name = j["named"].get<std::string>();
    if (name == "sphere") return MatrixField::sphere_chart(dim);
    fail(path + ".named", "unknown named matrix '" + name + "' (known: sphere)");
  }
  if (j.is_object() && j.contains("identity"))
    return MatrixField::identity(dim, get_number(j["identity"], path + ".identity"));
  if (j.is_object() && j.contains("entries")) {
    const auto& rows = j["entries"];
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
      fail(path + ".entries", "expected a " + std::to_string(dim) + "-row array");
    // read the full grid, enforce symmetry, keep the upper triangle
    std::vector<std::vector<Polynomial>> grid(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      if (!rows[static_cast<size_t>(i)].is_array() ||
          static_cast<int>(rows[static_cast<size_t>(i)].size()) != dim)
        fail(path + ".entries", "row " + std::to_string(i) + " must have " + std::to_string(dim) +
                                    " entries");
      for (int c = 0; c < dim; ++c)
        grid[static_cast<size_t>(i)].push_back(
            parse_poly(rows[static_cast<size_t>(i)][static_cast<size_t>(c)],
                       path + ".entries[" + std::to_string(i) + "][" + std::to_string(c) + "]",
                       dim));
    }
    std::vector<Polynomial> upper;
    for (int i = 0; i < dim; ++i)
      for (int c = i; c < dim; ++c) upper.push_back(grid[static_cast<size_t>(i)][static_cast<size_t>(c)]);
    return poly_matrix_field(dim, std::move(upper));
  }
  fail(path, "expected {named}, {identity} or {entries}");
}

VectorField parse_vector_field(const json& j, const std::string& path, int dim) {
  if (j.is_object() && j.contains("named")) {
    std::string name = j["named"].get<std::string>();
    if (name == "rotation") {
      if (dim < 2) fail(path, "rotation needs dimension >= 2");
      return VectorField::rotation(dim);
    }
    if (name == "dilation") return VectorField::dilation(dim);
    fail(path + ".named", "unknown named field '" + name + "' (known: rotation, dilation)");
  }
  if (j.is_object() && j.contains("constant")) {
    return VectorField::constant(get_vector(j["constant"], path + ".constant", dim));
  }
  if (j.is_object() && j.contains("components")) {
    const auto& comps = j["components"];
    if (!comps.is_array() || static_cast<int>(comps.size()) != dim)
      fail(path + ".components", "expected " + std::to_string(dim) + " polynomials");
    std::vector<Polynomial> polys;
    for (int i = 0; i < dim; ++i)
      polys.push_back(parse_poly(comps[static_cast<size_t>(i)],
                                 path + ".components[" + std::to_string(i) + "]", dim));
    return poly_vector_field(std::move(polys));
  }
  fail(path, "expected {named}, {constant} or {components}");
}

MetricSpec parse_metric(const json& j, const std::string& path, ChartDomain chart) {
  if (!j.is_object() || !j.contains("kind")) fail(path, "expected an object with 'kind'");
  std::string kind = j["kind"].get<std::string>();
  const int dim = chart.dim();
  if (kind == "euclidean") return MetricSpec::euclidean(std::move(chart));
  if (kind == "riemannian") {
    if (!j.contains("a")) fail(path, "riemannian metric needs 'a'");
    return MetricSpec::riemannian(parse_matrix(j["a"], path + ".a", dim), std::move(chart));
  }
  if (kind == "randers") {
    if (!j.contains("a") || !j.contains("b")) fail(path, "randers metric needs 'a' and 'b'");
    return MetricSpec::randers(parse_matrix(j["a"], path + ".a", dim),
                               parse_vector_field(j["b"], path + ".b", dim), std::move(chart));
  }
  if (kind == "quartic") {
    if (!j.contains("axis_coefficients")) fail(path, "quartic metric needs 'axis_coefficients'");
    const auto& coeffs = j["axis_coefficients"];
    if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != dim)
      fail(path + ".axis_coefficients", "expected " + std::to_string(dim) + " polynomials");
    std::vector<ChartScalarField> fields;
    for (int i = 0; i < dim; ++i) {
      Polynomial p = parse_poly(coeffs[static_cast<size_t>(i)],
                                path + ".axis_coefficients[" + std::to_string(i) + "]", dim);
      fields.push_back(poly_scalar_field(std::move(p)));
    }
    std::vector<ChartScalarField> cross;
    if (j.contains("cross_coefficients")) {
      const auto& cc = j["cross_coefficients"];
      size_t pairs = static_cast<size_t>(dim) * (dim - 1) / 2;
      if (!cc.is_array() || cc.size() != pairs)
        fail(path + ".cross_coefficients",
             "expected " + std::to_string(pairs) + " polynomials (one per i<j pair)");
      for (size_t i = 0; i < pairs; ++i) {
        Polynomial p = parse_poly(cc[i], path + ".cross_coefficients[" + std::to_string(i) + "]",
                                  dim);
        cross.push_back(poly_scalar_field(std::move(p)));
      }
    }
    double margin = j.contains("cone_margin") ? get_number(j["cone_margin"], path + ".cone_margin")
                                              : 0.15;
    return MetricSpec::quartic(std::move(fields), std::move(cross), std::move(chart), margin);
  }
  fail(path + ".kind", "unknown metric kind '" + kind + "'");
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::vector<TangentSample> ScenarioConfig::samples() const {
  if (!sample_list.empty()) return sample_list;
  return draw_samples(metric.domain(), sample_count, seed);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string raw = buffer.str();

  json j;
  try {
    j = json::parse(raw);
  } catch (const json::parse_error& e) {
    // translate the byte offset into a line number
    size_t line = 1;
    for (size_t q = 0; q < e.byte && q < raw.size(); ++q)
      if (raw[q] == '\n') ++line;
    throw ConfigError("syntax error at line " + std::to_string(line) + ": " + e.what());
  }

  ScenarioConfig cfg;
  cfg.digest = fnv1a_hex(raw);

  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    fail("dimension", "required integer");
  cfg.dimension = j["dimension"].get<int>();
  if (cfg.dimension < 1 || cfg.dimension > 8) fail("dimension", "must be in 1..8");

  if (!j.contains("chart") || !j["chart"].is_object() || !j["chart"].contains("box"))
    fail("chart", "expected {\"box\": {\"lo\": [...], \"hi\": [...]}}");
  VecD lo = get_vector(j["chart"]["box"]["lo"], "chart.box.lo", cfg.dimension);
  VecD hi = get_vector(j["chart"]["box"]["hi"], "chart.box.hi", cfg.dimension);
  ChartDomain chart = ChartDomain::box(std::move(lo), std::move(hi));

  if (!j.contains("metric")) fail("metric", "required");
  cfg.metric = parse_metric(j["metric"], "metric", chart);

  if (j.contains("samples")) {
    const auto& s = j["samples"];
    if (s.contains("list")) {
      if (!s["list"].is_array() || s["list"].empty())
        fail("samples.list", "expected a non-empty array of samples");
      for (size_t k = 0; k < s["list"].size(); ++k) {
        const auto& e = s["list"][k];
        std::string p = "samples.list[" + std::to_string(k) + "]";
        VecD x = get_vector(e["x"], p + ".x", cfg.dimension);
        VecD v = get_vector(e["v"], p + ".v", cfg.dimension);
        TangentSample sample(std::move(x), std::move(v));
        if (!cfg.metric.domain().contains(sample)) fail(p, "sample outside the metric domain");
        cfg.sample_list.push_back(std::move(sample));
      }
    } else {
      if (!s.contains("seed") || !s["seed"].is_number_unsigned())
        fail("samples.seed", "random sampling requires an explicit seed");
      cfg.seed = s["seed"].get<uint64_t>();
      if (!s.contains("count") || !s["count"].is_number_integer() || s["count"].get<int>() < 1)
        fail("samples.count", "required positive integer");
      cfg.sample_count = s["count"].get<int>();
    }
  } else {
    cfg.sample_count = 20;
  }

  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (t.contains("integration")) cfg.tolerances.integration = get_number(t["integration"], "tolerances.integration");
    if (t.contains("derivative")) cfg.tolerances.derivative = get_number(t["derivative"], "tolerances.derivative");
    if (t.contains("suite")) cfg.tolerances.suite = get_number(t["suite"], "tolerances.suite");
  }

  auto parse_span = [&](const json& g, const std::string& p, double& t0, double& t1) {
    if (!g.contains("t_span") || !g["t_span"].is_array() || g["t_span"].size() != 2)
      fail(p + ".t_span", "expected [t0, t1]");
    t0 = get_number(g["t_span"][0], p + ".t_span[0]");
    t1 = get_number(g["t_span"][1], p + ".t_span[1]");
    if (t0 == t1) fail(p + ".t_span", "empty span");
  };

  if (j.contains("geodesic")) {
    const auto& g = j["geodesic"];
    GeodesicRequest req;
    req.x0 = get_vector(g["x0"], "geodesic.x0", cfg.dimension);
    req.v0 = get_vector(g["v0"], "geodesic.v0", cfg.dimension);
    parse_span(g, "geodesic", req.t_begin, req.t_end);
    if (g.contains("points")) req.points = g["points"].get<int>();
    if (req.points < 2) fail("geodesic.points", "need at least 2 points");
    cfg.geodesic = std::move(req);
  }

  if (j.contains("jacobi")) {
    const auto& g = j["jacobi"];
    JacobiRequest req;
    req.x0 = get_vector(g["x0"], "jacobi.x0", cfg.dimension);
    req.v0 = get_vector(g["v0"], "jacobi.v0", cfg.dimension);
    req.j0 = get_vector(g["j0"], "jacobi.j0", cfg.dimension);
    req.j0_dot = get_vector(g["j0_dot"], "jacobi.j0_dot", cfg.dimension);
    parse_span(g, "jacobi", req.t_begin, req.t_end);
    if (g.contains("points")) req.points = g["points"].get<int>();
    if (req.points < 2) fail("jacobi.points", "need at least 2 points");
    cfg.jacobi = std::move(req);
  }

  if (j.contains("lie")) {
    if (!j["lie"].contains("vector_field")) fail("lie.vector_field", "required");
    cfg.lie_field = parse_vector_field(j["lie"]["vector_field"], "lie.vector_field", cfg.dimension);
  }

  cfg.metric.validate(10, cfg.seed);
  return cfg;
}

}  // namespace finsler::cli
