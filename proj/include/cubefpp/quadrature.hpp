#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "cubefpp/common.hpp"

// Adaptive Gauss-Kronrod 7/15 panels on the worst-segment-first policy.
// Deterministic for a fixed config: the refinement order is a strict
// priority (error, then left endpoint) and the final sum runs left to right.

namespace cubefpp {

struct QuadratureResult {
  double value = 0.0;
  double est_error = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  int max_subdivisions = 2048;
  int initial_segments = 8;  // catches narrow boundary features
};

struct QuadratureError : Error {
  QuadratureError(const std::string& msg, QuadratureResult best_in)
      : Error(msg), best(best_in) {}
  QuadratureResult best;  // best estimate at the point of failure
};

namespace detail {

// Kronrod-15 abscissae on [0,1] (symmetric about 0) and weights; the odd
// positions are the embedded Gauss-7 nodes.
inline constexpr double kKronrodX[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussW[4] = {0.129484966168870, 0.279705391489277,
                                      0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(F&& f, double a, double b, double* value, double* err) {
  double c = 0.5 * (a + b);
  double h = 0.5 * (b - a);
  double fc = f(c);
  double kron = kKronrodW[7] * fc;
  double gauss = kGaussW[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double x = h * kKronrodX[i];
    double fs = f(c - x) + f(c + x);
    kron += kKronrodW[i] * fs;
    if (i % 2 == 1) gauss += kGaussW[i / 2] * fs;
  }
  *value = kron * h;
  // |K - G| is a deliberately conservative per-segment error bound.
  *err = std::abs((kron - gauss) * h);
}

struct Segment {
  double a, b, value, err;
};
struct SegmentWorse {
  bool operator()(const Segment& x, const Segment& y) const {
    if (x.err != y.err) return x.err < y.err;
    return x.a > y.a;
  }
};

}  // namespace detail

template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    QuadratureOptions opt = {}) {
  QuadratureResult res;
  if (!(a <= b)) throw ConfigError("integrate_adaptive: need a <= b");
  if (!(opt.rel_tol > 0.0) && !(opt.abs_tol > 0.0))
    throw ConfigError("integrate_adaptive: need a positive tolerance");
  if (opt.max_subdivisions < 1)
    throw ConfigError("integrate_adaptive: max_subdivisions must be >= 1");
  if (a == b) {
    res.converged = true;
    return res;
  }
  std::priority_queue<detail::Segment, std::vector<detail::Segment>,
                      detail::SegmentWorse>
      queue;
  int init = std::max(1, opt.initial_segments);
  double total_value = 0.0, total_err = 0.0;
  auto push_segment = [&](double lo, double hi) {
    detail::Segment s{lo, hi, 0.0, 0.0};
    detail::gk15(f, lo, hi, &s.value, &s.err);
    if (!std::isfinite(s.value))
      throw QuadratureError("integrand produced a non-finite panel", res);
    total_value += s.value;
    total_err += s.err;
    queue.push(s);
  };
  for (int i = 0; i < init; ++i) {
    double lo = a + (b - a) * i / init;
    double hi = (i + 1 == init) ? b : a + (b - a) * (i + 1) / init;
    push_segment(lo, hi);
  }
  res.subdivisions = init;
  auto tolerance = [&] {
    return std::max(opt.abs_tol, opt.rel_tol * std::abs(total_value));
  };
  while (total_err > tolerance()) {
    if (res.subdivisions >= opt.max_subdivisions) {
      // collect best estimate before reporting failure
      res.value = total_value;
      res.est_error = total_err;
      throw QuadratureError(
          "quadrature did not converge within max_subdivisions", res);
    }
    detail::Segment worst = queue.top();
    queue.pop();
    total_value -= worst.value;
    total_err -= worst.err;
    double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval at double resolution; keep its estimate and move on
      total_value += worst.value;
      total_err += worst.err;
      break;
    }
    push_segment(worst.a, mid);
    push_segment(mid, worst.b);
    res.subdivisions += 1;
  }
  // Left-to-right summation for run-to-run determinism.
  std::vector<detail::Segment> segs;
  segs.reserve(queue.size());
  while (!queue.empty()) {
    segs.push_back(queue.top());
    queue.pop();
  }
  std::sort(segs.begin(), segs.end(),
            [](const detail::Segment& x, const detail::Segment& y) {
              return x.a < y.a;
            });
  res.value = 0.0;
  res.est_error = 0.0;
  for (const auto& s : segs) {
    res.value += s.value;
    res.est_error += s.err;
  }
  res.converged = res.est_error <= std::max(opt.abs_tol,
                                            opt.rel_tol * std::abs(res.value));
  return res;
}

// Integrate exp(log_f(t)) against heavy dynamic range: the integrand is
// rescaled by its coarse-grid maximum so panels stay in normal double range,
// then the result is multiplied back.
template <class LogF>
QuadratureResult integrate_log_scaled(LogF&& log_f, double a, double b,
                                      QuadratureOptions opt = {}) {
  if (!(a <= b)) throw ConfigError("integrate_log_scaled: need a <= b");
  QuadratureResult zero;
  zero.converged = true;
  if (a == b) return zero;
  double peak = -std::numeric_limits<double>::infinity();
  const int kScan = 257;
  for (int i = 0; i < kScan; ++i) {
    double t = a + (b - a) * (i + 0.5) / kScan;
    peak = std::max(peak, double(log_f(t)));
  }
  if (!std::isfinite(peak)) {
    if (peak == -std::numeric_limits<double>::infinity()) return zero;
    throw QuadratureError("log-integrand is not bounded above", zero);
  }
  QuadratureResult r = integrate_adaptive(
      [&](double t) {
        double lf = log_f(t);
        return std::exp(lf - peak);  // -inf maps to 0
      },
      a, b, opt);
  double scale = std::exp(peak);
  if (!std::isfinite(scale * r.value))
    throw QuadratureError("scaled integral overflows double range", r);
  r.value *= scale;
  r.est_error *= scale;
  return r;
}

}  // namespace cubefpp
