#pragma once

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "cubefpp/common.hpp"
#include "cubefpp/quadrature.hpp"

// Closed-form and quadrature-based expectations for the growth process on
// the n-cube.  The occupancy mean of a vertex at Hamming distance k from the
// origin at time t is
//
//     m(k, t) = (sinh t)^k (cosh t)^(n-k),
//
// and everything else here is built from it:
//
//   * a_expected(u)  = E[# ancestral contest pairs (descendant case)]
//                      = int_0^u (u-t) (n + n(n-1) tanh^2 t) e^{n f(t)} dt,
//                      f(t) = ln( sinh(u-t) cosh t ).
//   * ab_expected(u) = E[# ancestral contest pairs (both cases)]
//                      = 1/2 int_0^u (u-t) (n g + n(n-1) h) e^{n f} dt with
//                      f = ln F, F(t) = sinh(u-t) + e^{u-t} sinh^2 t,
//                      g = 2 e^{u-t} cosh(2t) / F,
//                      h = e^{2(u-t)} sinh^2(2t) / F^2.
//   * success_lower_bound = S * exp(-B/S) with S = max(0, m - A), a lower
//     bound for the probability that the all-ones corner is reached by time
//     u along a path free of earlier-born competitors.
//
// The A/AB integrands concentrate in O(1/n) boundary layers for large n, so
// they are evaluated in log space and rescaled (integrate_log_scaled).

namespace cubefpp {

// Dimension parameter for the analytic formulas.  Unlike the simulation
// side there is no 2^n table anywhere in this module, so n is only bounded
// by numeric sanity, not by addressability (n = 10^4 is routine).
struct AnalyticConfig {
  int n = 1;
  double tol = 1e-8;           // relative quadrature tolerance
  int max_subdivisions = 4096;

  void validate() const {
    if (n < 1) throw ConfigError("AnalyticConfig: n must be >= 1");
    if (!(tol > 0.0) || tol > 1e-6)
      throw ConfigError("AnalyticConfig: tol must be in (0, 1e-6]");
    if (max_subdivisions < 32)
      throw ConfigError("AnalyticConfig: max_subdivisions must be >= 32");
  }

  QuadratureOptions quad_options() const {
    QuadratureOptions q;
    q.rel_tol = tol;
    q.max_subdivisions = max_subdivisions;
    q.initial_segments = 16;
    return q;
  }
};

struct AnalyticValue {
  double value = 0.0;
  double est_error = 0.0;
  int n = 0;
  double u = 0.0;
};

struct DegenerateBound : Error {
  using Error::Error;
};

inline void check_nk(int n, int k) {
  if (n < 1) throw ConfigError("occupancy: n must be >= 1");
  if (k < 0 || k > n) throw ConfigError("occupancy: need 0 <= k <= n");
}

// log m(k, t); k * (-inf) at t=0 follows the k=0 -> 0, k>0 -> -inf
// convention.
inline double log_occupancy_mean(int n, int k, double t) {
  check_nk(n, k);
  if (t < 0) throw ConfigError("occupancy: t must be >= 0");
  if (t == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return k * std::log(std::sinh(t)) + (n - k) * std::log(std::cosh(t));
}

inline double occupancy_mean(int n, int k, double t) {
  return std::exp(log_occupancy_mean(n, k, t));
}

// Plain power evaluation.  Overflows for large n instead of degrading
// silently; the error says what to use instead.
inline double occupancy_mean_direct(int n, int k, double t) {
  check_nk(n, k);
  if (t < 0) throw ConfigError("occupancy: t must be >= 0");
  double v = std::pow(std::sinh(t), k) * std::pow(std::cosh(t), n - k);
  if (!std::isfinite(v))
    throw Error(
        "occupancy_mean_direct overflowed; use occupancy_mean / "
        "log_occupancy_mean (log-space) instead");
  return v;
}

// sum_w m(|w|, s) m(|v xor w|, t) over all 2^n vertices w, |v| = k.
// Dumb on purpose: this is the semigroup identity's verification side, the
// closed form being occupancy_mean(n, k, s + t).
inline double convolve_occupancy(int n, int k, double s, double t) {
  check_nk(n, k);
  if (n > 20)
    throw ConfigError(
        "convolve_occupancy: explicit 2^n sum limited to n <= 20; use "
        "occupancy_mean(n, k, s + t)");
  std::vector<double> ms(n + 1), mt(n + 1);
  for (int i = 0; i <= n; ++i) {
    ms[i] = occupancy_mean(n, i, s);
    mt[i] = occupancy_mean(n, i, t);
  }
  std::uint32_t v = (k == 32) ? ~0u : ((std::uint32_t{1} << k) - 1);
  double acc = 0.0;
  for (std::uint32_t w = 0; w < (std::uint32_t{1} << n); ++w)
    acc += ms[std::popcount(w)] * mt[std::popcount(v ^ w)];
  return acc;
}

struct Constants {
  double theta;          // ln(1 + sqrt 2); sinh(theta) = 1
  double a_limit;        // theta / sqrt 2
  double b_limit;        // ab_limit - a_limit = theta + 1/(3 - 2 sqrt 2)
  double ab_limit;       // theta e^theta / sqrt 2 + 1/(3 - 2 sqrt 2)
  double s_lower_limit;  // 1 - a_limit
  double p_lower_limit;  // s_lower_limit exp(-b_limit / s_lower_limit)
  double geodesic_slope; // sqrt 2 * theta, limiting path length per axis
};

inline Constants constants() {
  const double r2 = std::numbers::sqrt2;
  Constants c{};
  c.theta = std::log1p(r2);
  c.a_limit = c.theta / r2;
  c.ab_limit = c.theta * std::exp(c.theta) / r2 + 1.0 / (3.0 - 2.0 * r2);
  c.b_limit = c.ab_limit - c.a_limit;
  c.s_lower_limit = 1.0 - c.a_limit;
  c.p_lower_limit = c.s_lower_limit * std::exp(-c.b_limit / c.s_lower_limit);
  c.geodesic_slope = r2 * c.theta;
  return c;
}

inline double theta() { return std::log1p(std::numbers::sqrt2); }

inline void check_u(double u) {
  if (!(u > 0.0) || u > 100.0)
    throw ConfigError("analytic horizon u must be in (0, 100]");
}

inline AnalyticValue a_expected(const AnalyticConfig& cfg, double u) {
  cfg.validate();
  check_u(u);
  const double n = cfg.n;
  auto log_integrand = [&](double t) {
    double z = u - t;
    if (z <= 0.0 || t < 0.0)
      return -std::numeric_limits<double>::infinity();
    double lf = std::log(std::sinh(z)) + std::log(std::cosh(t));
    double th = std::tanh(t);
    return std::log(z) + std::log(n + n * (n - 1.0) * th * th) + n * lf;
  };
  QuadratureResult q =
      integrate_log_scaled(log_integrand, 0.0, u, cfg.quad_options());
  return AnalyticValue{q.value, q.est_error, cfg.n, u};
}

inline AnalyticValue ab_expected(const AnalyticConfig& cfg, double u) {
  cfg.validate();
  check_u(u);
  const double n = cfg.n;
  auto log_integrand = [&](double t) {
    double z = u - t;
    if (z <= 0.0 || t < 0.0)
      return -std::numeric_limits<double>::infinity();
    double st = std::sinh(t);
    // F = sinh(u-t) cosh^2 t + cosh(u-t) sinh^2 t, in cancellation-free form
    double F = std::sinh(z) + std::exp(z) * st * st;
    double lf = std::log(F);
    double g = 2.0 * std::exp(z) * std::cosh(2.0 * t) / F;
    double s2 = std::sinh(2.0 * t);
    double h = std::exp(2.0 * z) * s2 * s2 / (F * F);
    return -std::numbers::ln2 + std::log(z) +
           std::log(n * g + n * (n - 1.0) * h) + n * lf;
  };
  QuadratureResult q =
      integrate_log_scaled(log_integrand, 0.0, u, cfg.quad_options());
  return AnalyticValue{q.value, q.est_error, cfg.n, u};
}

inline AnalyticValue b_expected(const AnalyticConfig& cfg, double u) {
  AnalyticValue ab = ab_expected(cfg, u);
  AnalyticValue a = a_expected(cfg, u);
  return AnalyticValue{ab.value - a.value, ab.est_error + a.est_error, cfg.n,
                       u};
}

struct SBounds {
  double lower = 0.0;  // max(0, m - A)
  double upper = 0.0;  // m
  double est_error = 0.0;
  int n = 0;
  double u = 0.0;
};

inline SBounds s_bounds(const AnalyticConfig& cfg, double u) {
  cfg.validate();
  check_u(u);
  double m = occupancy_mean(cfg.n, cfg.n, u);
  AnalyticValue a = a_expected(cfg, u);
  SBounds sb;
  sb.lower = std::max(0.0, m - a.value);
  sb.upper = m;
  sb.est_error = a.est_error;
  sb.n = cfg.n;
  sb.u = u;
  return sb;
}

// S_lb * exp(-B / S_lb).  The map x -> x e^{-B/x} is increasing for x > 0,
// so feeding the lower bound for S keeps this a valid lower bound.
inline AnalyticValue success_lower_bound(const AnalyticConfig& cfg, double u) {
  SBounds sb = s_bounds(cfg, u);
  if (!(sb.lower > 0.0))
    throw DegenerateBound(
        "success_lower_bound: m - A <= 0 at n=" + std::to_string(cfg.n) +
        ", u=" + std::to_string(u) + "; the bound is vacuous here");
  AnalyticValue b = b_expected(cfg, u);
  double s = sb.lower;
  double ratio = b.value / s;
  double value = s * std::exp(-ratio);
  // first-order propagation of the quadrature error estimates
  double dS = std::exp(-ratio) * (1.0 + ratio) * sb.est_error;
  double dB = std::exp(-ratio) * b.est_error;
  return AnalyticValue{value, dS + dB, cfg.n, u};
}

// P(all per-coordinate transition counts stay minimal | endpoint reached)
// = (t / sinh t)^n; the oriented fraction of conditioned-walk mass.
inline double oriented_mass_ratio(int n, double t) {
  if (n < 1) throw ConfigError("oriented_mass_ratio: n must be >= 1");
  if (t < 0) throw ConfigError("oriented_mass_ratio: t must be >= 0");
  if (t == 0.0) return 1.0;
  return std::exp(n * (std::log(t) - std::log(std::sinh(t))));
}

}  // namespace cubefpp
