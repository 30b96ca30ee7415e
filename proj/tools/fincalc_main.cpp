#include <iostream>

#include <CLI11.hpp>

#include "finsler/cli/commands.hpp"
#include "finsler/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fincalc: batch evaluation of anisotropic tensor calculus on coordinate charts"};
  app.set_version_flag("--version", std::string("fincalc ") + finsler::kVersion);

  finsler::cli::RunOptions options;
  double tol = 0.0;
  std::uint64_t seed = 0;
  bool have_tol = false, have_seed = false;

  app.add_option("--command", options.command, "eval | geodesic | jacobi | lie | check")
      ->required();
  app.add_option("--config", options.config_path, "scenario config file (JSON)")->required();
  app.add_option("--output", options.output_path, "output CSV path")->required();
  app.add_option("--tol", tol, "override tolerances.suite")->each([&](const std::string&) {
    have_tol = true;
  });
  app.add_option("--seed", seed, "override the sampling seed")->each([&](const std::string&) {
    have_seed = true;
  });
  app.add_option("--jobs", options.jobs, "parallel sample evaluation")->check(CLI::Range(1, 64));

  CLI11_PARSE(app, argc, argv);
  if (have_tol) options.tol = tol;
  if (have_seed) options.seed = seed;

  try {
    return finsler::cli::run_command(options);
  } catch (const finsler::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return finsler::cli::kExitConfig;
  } catch (const finsler::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return finsler::cli::kExitConfig;
  } catch (const finsler::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return finsler::cli::kExitDomain;
  } catch (const finsler::DegeneracyError& e) {
    std::cerr << "degeneracy error: " << e.what() << "\n";
    return finsler::cli::kExitDomain;
  } catch (const finsler::AdmissibilityError& e) {
    std::cerr << "admissibility error: " << e.what() << "\n";
    return finsler::cli::kExitDomain;
  } catch (const finsler::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return finsler::cli::kExitNumerical;
  }
}
