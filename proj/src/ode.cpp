#include "finsler/ode.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

const OdeStep* find_step(const std::vector<OdeStep>& steps, double t) {
  if (steps.empty()) return nullptr;
  const bool fwd = steps.front().t1 >= steps.front().t0;
  // binary search over ordered step intervals
  size_t lo = 0, hi = steps.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    bool after = fwd ? (t > steps[mid].t1) : (t < steps[mid].t1);
    if (after)
      lo = mid + 1;
    else
      hi = mid;
  }
  return &steps[lo];
}

}  // namespace

VecD DenseOde::value(double t) const {
  const OdeStep* st = find_step(steps_, t);
  if (!st) throw IntegrationError("DenseOde::value: empty solution");
  double h = st->t1 - st->t0;
  double s = (t - st->t0) / h;
  double u = 1.0 - s;
  VecD out(st->rcont1.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = st->rcont1[i] +
             s * (st->rcont2[i] + u * (st->rcont3[i] + s * (st->rcont4[i] + u * st->rcont5[i])));
  }
  return out;
}

VecD DenseOde::derivative(double t) const {
  const OdeStep* st = find_step(steps_, t);
  if (!st) throw IntegrationError("DenseOde::derivative: empty solution");
  double h = st->t1 - st->t0;
  double s = (t - st->t0) / h;
  double u = 1.0 - s;
  VecD out(st->rcont1.size());
  for (size_t i = 0; i < out.size(); ++i) {
    // d/ds of rcont1 + s(rcont2 + u(rcont3 + s(rcont4 + u rcont5)))
    double p = st->rcont2[i] + (u - s) * st->rcont3[i] + (2.0 * s * u - s * s) * st->rcont4[i] +
               (2.0 * s * u * u - 2.0 * s * s * u) * st->rcont5[i];
    out[i] = p / h;
  }
  return out;
}

std::vector<double> DenseOde::grid() const {
  std::vector<double> g;
  g.reserve(steps_.size() + 1);
  if (!steps_.empty()) g.push_back(steps_.front().t0);
  for (const auto& st : steps_) g.push_back(st.t1);
  return g;
}

DenseOde integrate_ode(const OdeRhs& rhs, VecD y0, double t0, double t1,
                       const OdeOptions& options, const OdeInside& inside) {
  const size_t n = y0.size();
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::fabs(t1 - t0);
  if (span == 0.0) throw UsageError("integrate_ode: empty time span");

  DenseOde sol;
  sol.t_begin_ = t0;
  sol.t_end_ = t1;

  VecD y = std::move(y0), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  rhs(t0, y, k1);
  for (double c : k1)
    if (!std::isfinite(c)) throw IntegrationError("integrate_ode: non-finite derivative at start");

  double h = options.initial_step;
  if (h == 0.0) {
    double ynorm = std::max(norm2(y), 1.0);
    double fnorm = std::max(norm2(k1), 1e-8);
    h = 0.01 * ynorm / fnorm;
  }
  h = dir * std::min(std::fabs(h), span);

  double t = t0;
  long steps_taken = 0;
  bool rejected = false;

  auto stage = [&](const VecD& base, VecD& out, std::initializer_list<std::pair<double, const VecD*>> terms) {
    for (size_t i = 0; i < n; ++i) {
      double acc = base[i];
      for (const auto& [c, k] : terms) acc += h * c * (*k)[i];
      out[i] = acc;
    }
  };

  while (dir * (t1 - t) > 1e-14 * span) {
    if (++steps_taken > options.max_steps)
      throw IntegrationError("integrate_ode: step limit exceeded");
    if (options.max_step > 0.0 && std::fabs(h) > options.max_step) h = dir * options.max_step;
    if (dir * (t + h - t1) > 0.0) h = t1 - t;

    stage(y, ytmp, {{a21, &k1}});
    rhs(t + h / 5.0, ytmp, k2);
    stage(y, ytmp, {{a31, &k1}, {a32, &k2}});
    rhs(t + 3.0 * h / 10.0, ytmp, k3);
    stage(y, ytmp, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    rhs(t + 4.0 * h / 5.0, ytmp, k4);
    stage(y, ytmp, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    rhs(t + 8.0 * h / 9.0, ytmp, k5);
    stage(y, ytmp, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    rhs(t + h, ytmp, k6);
    stage(y, ynew, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    rhs(t + h, ynew, k7);

    double err = 0.0;
    bool finite = true;
    for (size_t i = 0; i < n; ++i) {
      if (!std::isfinite(ynew[i])) {
        finite = false;
        break;
      }
      double sk = options.abs_tol +
                  options.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                       e7 * k7[i]);
      err += (ei / sk) * (ei / sk);
    }
    err = finite ? std::sqrt(err / static_cast<double>(n)) : 1e10;

    if (err > 1.0) {
      double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      if (std::fabs(h) < 1e-14 * span)
        throw IntegrationError("integrate_ode: step size underflow (stiff or singular system)");
      rejected = true;
      continue;
    }

    OdeStep st;
    st.t0 = t;
    st.t1 = t + h;
    st.rcont1 = y;
    st.rcont2.resize(n);
    st.rcont3.resize(n);
    st.rcont4.resize(n);
    st.rcont5.resize(n);
    for (size_t i = 0; i < n; ++i) {
      double ydiff = ynew[i] - y[i];
      double bspl = h * k1[i] - ydiff;
      st.rcont2[i] = ydiff;
      st.rcont3[i] = bspl;
      st.rcont4[i] = ydiff - h * k7[i] - bspl;
      st.rcont5[i] =
          h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    sol.steps_.push_back(std::move(st));

    t += h;
    y = ynew;
    k1 = k7;  // FSAL

    if (inside && !inside(t, y)) {
      // Bisect the exit time on the dense output of the step just taken.
      const OdeStep& last = sol.steps_.back();
      double lo = last.t0, hi = last.t1;
      while (std::fabs(hi - lo) > 1e-10) {
        double mid = 0.5 * (lo + hi);
        if (inside(mid, sol.value(mid)))
          lo = mid;
        else
          hi = mid;
      }
      sol.truncated_ = true;
      sol.t_end_ = lo;
      return sol;
    }

    double fac = std::min(rejected ? 1.0 : 5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.2)));
    h *= fac;
    rejected = false;
  }

  sol.t_end_ = t;
  return sol;
}

}  // namespace finsler
