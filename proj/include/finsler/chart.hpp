#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

// Directions shorter than this are rejected outright, never perturbed.
inline constexpr double kMinDirectionNorm = 1e-12;

inline std::string format_vec(const VecD& v) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

/// Open coordinate chart: an axis-aligned box or a user membership predicate
/// on R^n. The manifold of a session is a single chart.
class ChartDomain {
 public:
  static ChartDomain box(VecD lo, VecD hi) {
    ChartDomain c;
    c.dim_ = static_cast<int>(lo.size());
    c.lo_ = std::move(lo);
    c.hi_ = std::move(hi);
    if (c.dim_ < 1 || c.hi_.size() != c.lo_.size())
      throw UsageError("ChartDomain::box: inconsistent bounds");
    for (int i = 0; i < c.dim_; ++i)
      if (!(c.lo_[i] < c.hi_[i])) throw UsageError("ChartDomain::box: empty box");
    return c;
  }

  static ChartDomain predicate(int dim, std::function<bool(const VecD&)> member) {
    ChartDomain c;
    c.dim_ = dim;
    c.member_ = std::move(member);
    if (dim < 1) throw UsageError("ChartDomain::predicate: dim must be >= 1");
    return c;
  }

  int dim() const { return dim_; }

  bool contains(const VecD& x) const {
    if (static_cast<int>(x.size()) != dim_) return false;
    if (member_) return member_(x);
    for (int i = 0; i < dim_; ++i)
      if (!(x[i] > lo_[i] && x[i] < hi_[i])) return false;
    return true;
  }

  /// Openness probe: x and all +-eps axis perturbations are members.
  bool is_interior(const VecD& x, double eps) const {
    if (!contains(x)) return false;
    VecD y = x;
    for (int i = 0; i < dim_; ++i) {
      y[i] = x[i] + eps;
      if (!contains(y)) return false;
      y[i] = x[i] - eps;
      if (!contains(y)) return false;
      y[i] = x[i];
    }
    return true;
  }

  bool is_box() const { return !member_; }
  const VecD& lower() const { return lo_; }
  const VecD& upper() const { return hi_; }

 private:
  int dim_ = 0;
  VecD lo_, hi_;
  std::function<bool(const VecD&)> member_;
};

/// Base point plus nonzero direction; the evaluation site of everything
/// anisotropic. Membership in a conic domain is checked by the operations
/// that carry a domain.
struct TangentSample {
  VecD x;
  VecD v;

  TangentSample(VecD base, VecD dir) : x(std::move(base)), v(std::move(dir)) {
    if (x.size() != v.size()) throw UsageError("TangentSample: dim mismatch");
    if (norm2(v) < kMinDirectionNorm)
      throw DomainError("TangentSample: direction norm below 1e-12 at x=" + format_vec(x));
  }

  int dim() const { return static_cast<int>(x.size()); }
};

/// Conic subset A of the slit tangent bundle over a chart: v = 0 is never a
/// member and membership is invariant under positive scaling of v.
class ConicDomain {
 public:
  ConicDomain() = default;
  ConicDomain(ChartDomain chart, std::function<bool(const VecD&, const VecD&)> fiber_member)
      : chart_(std::move(chart)), fiber_(std::move(fiber_member)) {}

  /// All of TM minus the zero section over the chart.
  static ConicDomain slit(ChartDomain chart) { return ConicDomain(std::move(chart), nullptr); }

  const ChartDomain& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }

  bool contains(const VecD& x, const VecD& v) const {
    if (!chart_.contains(x)) return false;
    if (norm2(v) < kMinDirectionNorm) return false;
    return fiber_ ? fiber_(x, v) : true;
  }
  bool contains(const TangentSample& s) const { return contains(s.x, s.v); }

  void require(const TangentSample& s, const char* where) const {
    if (!contains(s))
      throw DomainError(std::string(where) + ": sample outside domain, x=" + format_vec(s.x) +
                        " v=" + format_vec(s.v));
  }

 private:
  ChartDomain chart_ = ChartDomain::box({-1.0}, {1.0});
  std::function<bool(const VecD&, const VecD&)> fiber_;
};

}  // namespace finsler
