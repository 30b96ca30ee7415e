#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/metric.hpp"

namespace finsler::cli {

/// Schema violation; carries the offending field path (or line for syntax
/// errors). Mapped to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct GeodesicRequest {
  VecD x0, v0;
  double t_begin = 0.0, t_end = 1.0;
  int points = 33;
};

struct JacobiRequest {
  VecD x0, v0, j0, j0_dot;
  double t_begin = 0.0, t_end = 1.0;
  int points = 33;
};

struct Tolerances {
  double integration = 1e-9;
  double derivative = 1e-6;
  double suite = 1e-7;
};

struct ScenarioConfig {
  int dimension = 0;
  MetricSpec metric;
  uint64_t seed = 1;
  int sample_count = 0;                  // used when sample_list is empty
  std::vector<TangentSample> sample_list;
  Tolerances tolerances;
  std::optional<GeodesicRequest> geodesic;
  std::optional<JacobiRequest> jacobi;
  VectorField lie_field;                 // empty unless a lie block is present
  std::string digest;                    // FNV-1a of the raw config bytes

  /// Samples for sample-driven commands: the explicit list, or `count`
  /// seeded draws from the metric's domain.
  std::vector<TangentSample> samples() const;
};

/// Parses and validates a config file. Throws ConfigError with line/field
/// diagnostics on malformed input.
ScenarioConfig load_config(const std::string& path);

/// FNV-1a 64 digest used in output headers.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace finsler::cli
