#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cubefpp/common.hpp"

// Brute-force evaluation of the contest-pair expectations for tiny n:
// the raw vertex/direction sums under a 2-D composite Simpson rule over
// the simplex {s, t >= 0, s + t <= u}.  No reduction, no log-space, no
// shared code with the production quadrature path -- this module exists to
// check that path, so it transcribes the unreduced formulas literally:
//
//   A(u)    = sum_v sum_i sum_j  iint  m(v,s) m(1+v, u-s-t) m(e_i+e_j, t)
//   (A+B)(u)= sum_v sum_w sum_i sum_j iint m(v,s) m(1+w, u-s-t)
//               * [ m(w+v,t) m(w+v+e_i+e_j,t) + m(w+v+e_i,t) m(w+v+e_j,t) ]
//
// with vertex addition carried out coordinatewise mod 2 (XOR).

namespace cubefpp::oracle {

inline double mass_pow(int n, int k, double t) {
  return std::pow(std::sinh(t), k) * std::pow(std::cosh(t), n - k);
}

inline std::vector<double> mass_table(int n, double t) {
  std::vector<double> m(n + 1);
  for (int k = 0; k <= n; ++k) m[k] = mass_pow(n, k, t);
  return m;
}

namespace detail {

inline void check_small(int n, double u, int panels) {
  if (n < 1 || n > 4)
    throw ConfigError("brute-force oracle supports 1 <= n <= 4");
  if (!(u > 0.0)) throw ConfigError("brute-force oracle needs u > 0");
  if (panels < 2 || panels % 2 != 0)
    throw ConfigError("brute-force oracle needs an even panel count >= 2");
}

inline double simpson_weight(int i, int npanels) {
  if (i == 0 || i == npanels) return 1.0;
  return (i % 2 == 1) ? 4.0 : 2.0;
}

// Simpson over the simplex: outer nodes t_i on [0, u], inner nodes s_j on
// [0, u - t_i].  `f(s, t)` must be smooth on the closed simplex.
template <class F>
double simpson_simplex(F&& f, double u, int panels) {
  double outer_h = u / panels;
  double acc = 0.0;
  for (int i = 0; i <= panels; ++i) {
    double t = u * i / panels;
    double rem = u - t;
    if (rem <= 0.0) continue;  // zero-width inner integral
    double inner_h = rem / panels;
    double inner = 0.0;
    for (int j = 0; j <= panels; ++j) {
      double s = rem * j / panels;
      inner += simpson_weight(j, panels) * f(s, t);
    }
    inner *= inner_h / 3.0;
    acc += simpson_weight(i, panels) * inner;
  }
  return acc * outer_h / 3.0;
}

}  // namespace detail

inline double a_brute_force(int n, double u, int panels = 128) {
  detail::check_small(n, u, panels);
  std::uint32_t nverts = std::uint32_t{1} << n;
  std::uint32_t ones = nverts - 1;
  auto f = [&](double s, double t) {
    std::vector<double> ms = mass_table(n, s);
    std::vector<double> mr = mass_table(n, u - s - t);
    std::vector<double> mt = mass_table(n, t);
    double acc = 0.0;
    for (std::uint32_t v = 0; v < nverts; ++v) {
      double lead = ms[std::popcount(v)] * mr[std::popcount(ones ^ v)];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          std::uint32_t eij = (std::uint32_t{1} << i) ^ (std::uint32_t{1} << j);
          acc += lead * mt[std::popcount(eij)];
        }
    }
    return acc;
  };
  return detail::simpson_simplex(f, u, panels);
}

inline double ab_brute_force(int n, double u, int panels = 128) {
  detail::check_small(n, u, panels);
  std::uint32_t nverts = std::uint32_t{1} << n;
  std::uint32_t ones = nverts - 1;
  auto f = [&](double s, double t) {
    std::vector<double> ms = mass_table(n, s);
    std::vector<double> mr = mass_table(n, u - s - t);
    std::vector<double> mt = mass_table(n, t);
    double acc = 0.0;
    for (std::uint32_t v = 0; v < nverts; ++v)
      for (std::uint32_t w = 0; w < nverts; ++w) {
        double lead = ms[std::popcount(v)] * mr[std::popcount(ones ^ w)];
        std::uint32_t d = w ^ v;
        for (int i = 0; i < n; ++i) {
          std::uint32_t ei = std::uint32_t{1} << i;
          for (int j = 0; j < n; ++j) {
            std::uint32_t ej = std::uint32_t{1} << j;
            double pair1 = mt[std::popcount(d)] * mt[std::popcount(d ^ ei ^ ej)];
            double pair2 = mt[std::popcount(d ^ ei)] * mt[std::popcount(d ^ ej)];
            acc += lead * (pair1 + pair2);
          }
        }
      }
    return acc;
  };
  return detail::simpson_simplex(f, u, panels);
}

}  // namespace cubefpp::oracle
