#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cubefpp/common.hpp"
#include "cubefpp/rng.hpp"

// Conditioned coordinate walks: per coordinate an odd number of switch
// times (Poisson conditioned on odd parity), placed uniformly on (0, t_end)
// and merged.  The result is a uniformly random lattice path from the origin
// to the all-ones corner with the step-count law of the ancestral lines at
// the all-ones corner.  Coordinates here are indices, not bitmasks, so n is
// not limited to cube dimensions that fit in a machine word.

namespace cubefpp {

struct WalkEvent {
  double time;
  int coordinate;
};

struct WalkPath {
  int n = 0;
  double t_end = 0.0;
  std::vector<WalkEvent> events;               // strictly increasing times
  std::vector<std::uint64_t> endpoint_mask;    // XOR of all flips
};

// Poisson(rate) conditioned on an odd outcome: P(k) = rate^k / (k! sinh rate)
// for odd k.  Inverse CDF over the odd terms for moderate rates, rejection
// from the unconditioned distribution beyond that.
inline int sample_odd_poisson(double rate, CounterRng& rng) {
  if (!(rate > 0.0) || rate > 700.0)
    throw ConfigError("sample_odd_poisson: rate must be in (0, 700]");
  if (rate <= 30.0) {
    const double norm = std::sinh(rate);
    const double tail_cutoff = 1e-15;
    double target = rng.u01() * norm;
    int k = 1;
    double term = rate;  // rate^1 / 1!
    double cum = term;
    while (cum < target && term > tail_cutoff * norm) {
      term *= rate * rate / (double(k + 1) * double(k + 2));
      k += 2;
      cum += term;
    }
    return k;  // if the tail was cut, k sits at the cutoff point
  }
  // rejection: unconditioned Poisson, redrawn until odd (p ~ 1/2)
  const double limit = std::exp(-rate);
  for (;;) {
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= rng.u01();
    } while (p > limit);
    if ((k - 1) % 2 == 1) return k - 1;
  }
}

inline WalkPath sample_conditioned_walk(int n, double t_end, CounterRng& rng) {
  if (n < 1) throw ConfigError("sample_conditioned_walk: n must be >= 1");
  if (!(t_end > 0.0))
    throw ConfigError("sample_conditioned_walk: t_end must be > 0");
  WalkPath path;
  path.n = n;
  path.t_end = t_end;
  for (int coord = 0; coord < n; ++coord) {
    int k = sample_odd_poisson(t_end, rng);
    for (int j = 0; j < k; ++j)
      path.events.push_back({t_end * rng.u01(), coord});
  }
  auto by_time = [](const WalkEvent& a, const WalkEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.coordinate < b.coordinate;
  };
  std::sort(path.events.begin(), path.events.end(), by_time);
  // ties are measure-zero but would make the merged order ambiguous:
  // redraw the later offender until times are strictly increasing
  for (;;) {
    bool clean = true;
    for (std::size_t i = 1; i < path.events.size(); ++i)
      if (path.events[i].time == path.events[i - 1].time) {
        path.events[i].time = t_end * rng.u01();
        clean = false;
      }
    if (clean) break;
    std::sort(path.events.begin(), path.events.end(), by_time);
  }
  path.endpoint_mask.assign((std::size_t(n) + 63) / 64, 0);
  for (const WalkEvent& e : path.events)
    path.endpoint_mask[std::size_t(e.coordinate) / 64] ^=
        std::uint64_t{1} << (e.coordinate % 64);
  return path;
}

inline bool endpoint_is_all_ones(const WalkPath& path) {
  for (int coord = 0; coord < path.n; ++coord)
    if (!((path.endpoint_mask[std::size_t(coord) / 64] >> (coord % 64)) & 1u))
      return false;
  return true;
}

struct WalkStats {
  int length = 0;
  std::vector<int> per_coordinate;
  int backsteps = 0;  // flips of a coordinate that was already set
  double length_over_n = 0.0;
};

inline WalkStats walk_stats(const WalkPath& path) {
  WalkStats ws;
  ws.per_coordinate.assign(path.n, 0);
  std::vector<std::uint64_t> state((std::size_t(path.n) + 63) / 64, 0);
  for (const WalkEvent& e : path.events) {
    ws.per_coordinate[e.coordinate] += 1;
    std::uint64_t& word = state[std::size_t(e.coordinate) / 64];
    std::uint64_t bit = std::uint64_t{1} << (e.coordinate % 64);
    if (word & bit) ws.backsteps += 1;
    word ^= bit;
  }
  ws.length = int(path.events.size());
  ws.length_over_n = double(ws.length) / path.n;
  return ws;
}

}  // namespace cubefpp
