#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cubefpp/common.hpp"

namespace cubefpp {

struct MetricSummary {
  std::string name;
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double std_error = 0.0;
  double min = 0.0;
  double max = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

// Linear-interpolation quantile on a sorted sample (R type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ConfigError("quantile of empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  double pos = q * double(sorted.size() - 1);
  std::size_t lo = std::size_t(pos);
  double frac = pos - double(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline MetricSummary summarize(std::string name, std::vector<double> xs) {
  if (xs.empty()) throw ConfigError("summarize: empty sample");
  MetricSummary s;
  s.name = std::move(name);
  s.count = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = xs.size() > 1 ? ss / double(xs.size() - 1) : 0.0;
  s.std_error = std::sqrt(s.variance / double(xs.size()));
  std::sort(xs.begin(), xs.end());
  s.min = xs.front();
  s.max = xs.back();
  s.q05 = quantile_sorted(xs, 0.05);
  s.q50 = quantile_sorted(xs, 0.50);
  s.q95 = quantile_sorted(xs, 0.95);
  return s;
}

// Deviation statistics of passage times around a reference point.
struct DeviationSummary {
  double reference = 0.0;
  double mean_plus = 0.0;   // E max(T - ref, 0)
  double mean_minus = 0.0;  // E max(ref - T, 0)
  double l1 = 0.0;          // E |T - ref|
  double l2 = 0.0;          // sqrt(E (T - ref)^2)
  double p_below = 0.0;     // P(T <= ref)
};

inline DeviationSummary deviation_summary(const std::vector<double>& ts,
                                          double reference) {
  if (ts.empty()) throw ConfigError("deviation_summary: empty sample");
  DeviationSummary d;
  d.reference = reference;
  double plus = 0.0, minus = 0.0, abs1 = 0.0, sq = 0.0, below = 0.0;
  for (double t : ts) {
    double dev = t - reference;
    double p = std::max(dev, 0.0);
    double m = std::max(-dev, 0.0);
    if (p * m != 0.0)
      throw Error("deviation_summary: positive and negative parts overlap");
    plus += p;
    minus += m;
    abs1 += std::abs(dev);
    sq += dev * dev;
    if (t <= reference) below += 1.0;
  }
  double inv = 1.0 / double(ts.size());
  d.mean_plus = plus * inv;
  d.mean_minus = minus * inv;
  d.l1 = abs1 * inv;
  d.l2 = std::sqrt(sq * inv);
  d.p_below = below * inv;
  if (d.l1 > d.l2 * (1.0 + 1e-12))
    throw Error("deviation_summary: L1 exceeded L2 (power-mean inequality)");
  return d;
}

// ---- two-sample Kolmogorov-Smirnov ----------------------------------------

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::uint64_t n1 = 0, n2 = 0;
};

// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
inline double ks_tail_probability(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    double term = std::exp(-2.0 * double(j) * double(j) * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw ConfigError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  KsResult r;
  r.statistic = d;
  r.n1 = a.size();
  r.n2 = b.size();
  double ne = double(a.size()) * double(b.size()) / double(a.size() + b.size());
  double sqrt_ne = std::sqrt(ne);
  r.p_value = ks_tail_probability((sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d);
  return r;
}

// ---- chi-square goodness of fit -------------------------------------------

namespace detail {

// regularized upper incomplete gamma Q(a, x), series + Lentz continued
// fraction split at x = a + 1
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, del = 1.0 / a, sum = del;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace detail

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// observed counts vs expected counts (same total); bins with expected < 5
// should be merged by the caller
inline Chi2Result chi2_gof(const std::vector<double>& observed,
                           const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw ConfigError("chi2_gof: need matching bins (>= 2)");
  Chi2Result r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0)
      throw ConfigError("chi2_gof: expected counts must be positive");
    double diff = observed[i] - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.dof = int(observed.size()) - 1;
  r.p_value = detail::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

}  // namespace cubefpp
