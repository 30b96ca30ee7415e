#pragma once

#include <optional>
#include <string>

#include "finsler/cli/config.hpp"
#include "finsler/cli/table.hpp"

namespace finsler::cli {

struct RunOptions {
  std::string command;  // eval | geodesic | jacobi | lie | check
  std::string config_path;
  std::string output_path;
  std::optional<double> tol;      // overrides tolerances.suite
  std::optional<uint64_t> seed;   // overrides the config seed
  int jobs = 1;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitNumerical = 4;

/// Executes one command and writes its table to the output path. Returns
/// the process exit code (checks failing makes `check` return nonzero).
int run_command(const RunOptions& options);

/// The invariant suite behind the `check` command, exposed for tests.
ResultTable run_checks(const ScenarioConfig& config, double suite_tol, bool* all_passed);

}  // namespace finsler::cli
