#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "finsler/cli/commands.hpp"
#include "finsler/cli/config.hpp"
#include "finsler/cli/table.hpp"

using namespace finsler;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p, std::ios::binary);
  out << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kEuclidean = R"({
  "dimension": 2,
  "chart": {"box": {"lo": [-2.0, -2.0], "hi": [2.0, 2.0]}},
  "metric": {"kind": "euclidean"},
  "samples": {"seed": 5, "count": 25},
  "geodesic": {"x0": [0.0, 0.0], "v0": [1.0, 0.0], "t_span": [0.0, 1.0], "points": 11}
})";

const char* kRanders = R"({
  "dimension": 2,
  "chart": {"box": {"lo": [-1.5, -1.5], "hi": [1.5, 1.5]}},
  "metric": {
    "kind": "randers",
    "a": {"identity": 1.0},
    "b": {"components": [
      {"terms": [{"c": 0.2, "p": [0, 0]}, {"c": 0.1, "p": [0, 1]}]},
      {"terms": [{"c": 0.15, "p": [1, 0]}]}
    ]}
  },
  "samples": {"seed": 9, "count": 8}
})";

}  // namespace

TEST_CASE("config: schema diagnostics carry field paths and line numbers") {
  auto p1 = write_temp("fincalc_bad1.json", R"({"chart": {}})");
  try {
    cli::load_config(p1.string());
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }

  auto p2 = write_temp("fincalc_bad2.json", "{\n  \"dimension\": 2,\n  oops\n}");
  try {
    cli::load_config(p2.string());
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  // sample outside the chart
  auto p3 = write_temp("fincalc_bad3.json", R"({
    "dimension": 2,
    "chart": {"box": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0]}},
    "metric": {"kind": "euclidean"},
    "samples": {"list": [{"x": [5.0, 0.0], "v": [1.0, 0.0]}]}
  })");
  CHECK_THROWS_AS(cli::load_config(p3.string()), cli::ConfigError);
}

TEST_CASE("config: digest is stable and seed-dependent sampling is deterministic") {
  auto p = write_temp("fincalc_euc.json", kEuclidean);
  auto cfg1 = cli::load_config(p.string());
  auto cfg2 = cli::load_config(p.string());
  CHECK(cfg1.digest == cfg2.digest);
  auto s1 = cfg1.samples(), s2 = cfg2.samples();
  REQUIRE(s1.size() == s2.size());
  for (size_t k = 0; k < s1.size(); ++k) {
    CHECK(s1[k].x == s2[k].x);
    CHECK(s1[k].v == s2[k].v);
  }
}

TEST_CASE("result table: 17-significant-digit round trip") {
  double value = 0.1 + 0.2;  // not representable exactly
  std::string cell = cli::ResultTable::num(value);
  double parsed = std::strtod(cell.c_str(), nullptr);
  CHECK(parsed == value);
}

TEST_CASE("check on euclidean: every gating property passes") {
  auto p = write_temp("fincalc_euc2.json", kEuclidean);
  auto cfg = cli::load_config(p.string());
  bool ok = false;
  cli::ResultTable table = cli::run_checks(cfg, 1e-7, &ok);
  CHECK(ok);
  for (const auto& row : table.rows()) {
    if (row[4] == "1") {
      INFO(row[0]);
      CHECK(row[3] == "1");
    }
  }
}

TEST_CASE("geodesic command: euclidean line reaches (1,0) at t=1") {
  auto p = write_temp("fincalc_euc3.json", kEuclidean);
  fs::path out = fs::temp_directory_path() / "fincalc_geo.csv";
  cli::RunOptions opt;
  opt.command = "geodesic";
  opt.config_path = p.string();
  opt.output_path = out.string();
  CHECK(cli::run_command(opt) == 0);
  std::string text = slurp(out);
  std::istringstream lines(text);
  std::string line, last;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') last = line;
  // last row: t=1
  std::istringstream cells(last);
  std::string cell;
  std::getline(cells, cell, ',');
  CHECK(std::strtod(cell.c_str(), nullptr) == doctest::Approx(1.0));
  std::getline(cells, cell, ',');
  CHECK(std::strtod(cell.c_str(), nullptr) == doctest::Approx(1.0).epsilon(1e-10));
  std::getline(cells, cell, ',');
  CHECK(std::strtod(cell.c_str(), nullptr) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("eval command: byte-identical replay with the same seed") {
  auto p = write_temp("fincalc_rnd.json", kRanders);
  fs::path out1 = fs::temp_directory_path() / "fincalc_eval1.csv";
  fs::path out2 = fs::temp_directory_path() / "fincalc_eval2.csv";
  cli::RunOptions opt;
  opt.command = "eval";
  opt.config_path = p.string();
  opt.output_path = out1.string();
  CHECK(cli::run_command(opt) == 0);
  opt.output_path = out2.string();
  opt.jobs = 3;  // parallel evaluation must not change the bytes
  CHECK(cli::run_command(opt) == 0);
  CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("seed and tolerance overrides take effect") {
  auto p = write_temp("fincalc_euc4.json", kEuclidean);
  fs::path out1 = fs::temp_directory_path() / "fincalc_seed1.csv";
  fs::path out2 = fs::temp_directory_path() / "fincalc_seed2.csv";
  cli::RunOptions opt;
  opt.command = "eval";
  opt.config_path = p.string();
  opt.output_path = out1.string();
  CHECK(cli::run_command(opt) == 0);
  opt.output_path = out2.string();
  opt.seed = 777;
  CHECK(cli::run_command(opt) == 0);
  std::string first = slurp(out1), second = slurp(out2);
  CHECK(first != second);  // different seed, different samples
  CHECK(second.find("seed: 777") != std::string::npos);

  // an absurdly tight suite tolerance makes check fail (on a curved metric;
  // the euclidean residuals are exactly zero)
  auto pr = write_temp("fincalc_rnd_tol.json", kRanders);
  auto cfg = cli::load_config(pr.string());
  cfg.tolerances.suite = 1e-300;
  bool ok = true;
  cli::run_checks(cfg, cfg.tolerances.suite, &ok);
  CHECK(!ok);
}

TEST_CASE("error mapping: degeneracy during eval is a domain-class failure") {
  // coefficient matrix degenerates on the x0 = 0 slice; the explicit sample
  // list pins evaluation there
  auto p = write_temp("fincalc_deg.json", R"({
    "dimension": 2,
    "chart": {"box": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0]}},
    "metric": {"kind": "riemannian", "a": {"entries": [
      [1.0, 0.0],
      [0.0, {"terms": [{"c": 1.0, "p": [1, 0]}]}]
    ]}},
    "samples": {"list": [{"x": [0.5, 0.0], "v": [1.0, 1.0]}]}
  })");
  fs::path out = fs::temp_directory_path() / "fincalc_deg.csv";
  cli::RunOptions opt;
  opt.command = "eval";
  opt.config_path = p.string();
  opt.output_path = out.string();
  // a(x) = diag(1, x0) is fine at x0=0.5 but validation probes the box;
  // samples on the degenerate slice would raise DegeneracyError. Either way
  // the library surfaces a typed error the binary maps to exit 3.
  CHECK_THROWS_AS(cli::run_command(opt), Error);
}

#ifdef FINCALC_BIN
TEST_CASE("binary: exit codes for schema errors and check success") {
  fs::path bad = write_temp("fincalc_bad_bin.json", "{ not json");
  fs::path out = fs::temp_directory_path() / "fincalc_bin_out.csv";
  std::string base = std::string(FINCALC_BIN);
  int rc = std::system(
      (base + " --command check --config " + bad.string() + " --output " + out.string() +
       " 2>/dev/null")
          .c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  fs::path good = write_temp("fincalc_good_bin.json", kEuclidean);
  rc = std::system(
      (base + " --command check --config " + good.string() + " --output " + out.string())
          .c_str());
  CHECK(WEXITSTATUS(rc) == 0);
}
#endif
