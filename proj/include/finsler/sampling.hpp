#pragma once

#include <cstdint>
#include <vector>

#include "finsler/chart.hpp"

namespace finsler {

/// Deterministic, platform-independent RNG (splitmix64 core). Every random
/// draw in the library and CLI goes through this so that a (config, seed)
/// pair replays bit-identically.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  VecD vector(int n, double a, double b) {
    VecD v(static_cast<size_t>(n));
    for (auto& x : v) x = uniform(a, b);
    return v;
  }

  VecD unit_vector(int n) {
    for (;;) {
      VecD v = vector(n, -1.0, 1.0);
      double r = norm2(v);
      if (r > 0.1) {
        for (auto& x : v) x /= r;
        return v;
      }
    }
  }

 private:
  uint64_t state_;
};

/// Draws `count` samples from a conic domain over a box chart: base points
/// uniform in the box shrunk toward its center, directions by rejection into
/// the fiber cone with |v| in [scale_lo, scale_hi].
inline std::vector<TangentSample> draw_samples(const ConicDomain& domain, int count, uint64_t seed,
                                               double scale_lo = 0.5, double scale_hi = 2.0) {
  if (!domain.chart().is_box())
    throw UsageError("draw_samples: chart must be a box to sample from");
  const int n = domain.dim();
  const VecD& lo = domain.chart().lower();
  const VecD& hi = domain.chart().upper();
  SeededRng rng(seed);
  std::vector<TangentSample> out;
  out.reserve(static_cast<size_t>(count));
  int guard = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++guard > 10000 * count)
      throw UsageError("draw_samples: rejection sampling failed to find members");
    VecD x(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      double pad = 0.05 * (hi[i] - lo[i]);
      x[i] = rng.uniform(lo[i] + pad, hi[i] - pad);
    }
    VecD v = rng.unit_vector(n);
    double scale = rng.uniform(scale_lo, scale_hi);
    for (auto& c : v) c *= scale;
    if (!domain.contains(x, v)) continue;
    out.emplace_back(std::move(x), std::move(v));
  }
  return out;
}

}  // namespace finsler
