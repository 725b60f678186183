#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cubefpp/common.hpp"
#include "cubefpp/hypercube.hpp"
#include "cubefpp/rng.hpp"

// First-passage percolation with i.i.d. Exp(1) edge weights: Dijkstra over
// the implicit cube graph, plus an exhaustive tiny-n oracle.

namespace cubefpp {

enum class WeightScheme {
  Stored,   // materialize all n*2^(n-1) weights up front
  Derived,  // recompute from (seed, edge_index) on every lookup
};

// Exp(1) weight per edge as a pure function of (seed, edge index), so the
// two schemes are pointwise identical and runs are replayable from the seed
// alone.
class WeightModel {
 public:
  WeightModel(Dim n, std::uint64_t seed,
              WeightScheme scheme = WeightScheme::Stored,
              std::uint64_t memory_budget = std::uint64_t{1} << 31)
      : n_(n), seed_(seed), scheme_(scheme),
        key_(prf64(seed, kStreamWeights)) {
    if (scheme_ == WeightScheme::Stored) {
      std::uint64_t bytes = n_.edge_count() * sizeof(double);
      if (bytes > memory_budget)
        throw CapExceeded("stored weights need " + std::to_string(bytes) +
                          " bytes (budget " + std::to_string(memory_budget) +
                          "); use WeightScheme::Derived");
      stored_.resize(n_.edge_count());
      for (EdgeIndex i = 0; i < stored_.size(); ++i)
        stored_[i] = exp1_from_bits(prf64(key_, i));
    }
  }

  double by_index(EdgeIndex i) const {
    if (i >= n_.edge_count()) throw ConfigError("edge index out of range");
    return scheme_ == WeightScheme::Stored ? stored_[i]
                                           : exp1_from_bits(prf64(key_, i));
  }
  double operator()(EdgeRef e) const { return by_index(edge_index(e, n_)); }

  Dim dim() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  WeightScheme scheme() const { return scheme_; }

 private:
  Dim n_;
  std::uint64_t seed_;
  WeightScheme scheme_;
  std::uint64_t key_;
  std::vector<double> stored_;
};

struct PassageOptions {
  Vertex source = 0;
  std::optional<Vertex> target;  // defaults to the all-ones corner
  bool want_geodesic = true;
  bool want_covering = false;             // full relaxation + max distance
  std::uint64_t memory_budget = std::uint64_t{1} << 31;
};

struct PassageResult {
  double t_first = 0.0;
  std::vector<Vertex> geodesic;  // source..target, empty unless requested
  int geodesic_length = 0;
  int backsteps = 0;
  double covering_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> per_direction_steps;
};

// Reusable scratch for trial loops; first_passage resizes it on demand.
struct FppWorkspace {
  std::vector<double> dist;
  std::vector<std::int8_t> pred;
  std::vector<std::pair<double, Vertex>> heap;
};

namespace detail {

struct HeapGreater {
  bool operator()(const std::pair<double, Vertex>& a,
                  const std::pair<double, Vertex>& b) const {
    // min-heap on (distance, vertex id): deterministic tie-breaking
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  }
};

}  // namespace detail

template <class WeightFn>
PassageResult first_passage(Dim n, WeightFn&& weight, PassageOptions opt = {},
                            FppWorkspace* external_ws = nullptr) {
  const std::uint32_t nverts = n.vertex_count();
  Vertex target = opt.target.value_or(n.one());
  if (opt.source >= nverts || target >= nverts)
    throw ConfigError("first_passage: source/target out of range");

  // dist + pred tables plus a generous heap allowance
  std::uint64_t est_bytes =
      std::uint64_t(nverts) * (sizeof(double) + 1) +
      std::uint64_t(nverts) * 16u * std::uint64_t(std::max(1, n.n() / 2));
  if (est_bytes > opt.memory_budget)
    throw CapExceeded("first_passage at n=" + std::to_string(n.n()) +
                      " needs ~" + std::to_string(est_bytes) +
                      " bytes (budget " + std::to_string(opt.memory_budget) +
                      ")");

  FppWorkspace local_ws;
  FppWorkspace& ws = external_ws ? *external_ws : local_ws;
  ws.dist.assign(nverts, std::numeric_limits<double>::infinity());
  ws.pred.assign(nverts, std::int8_t{-1});
  ws.heap.clear();

  detail::HeapGreater cmp;
  auto push = [&](double d, Vertex v) {
    ws.heap.emplace_back(d, v);
    std::push_heap(ws.heap.begin(), ws.heap.end(), cmp);
  };

  ws.dist[opt.source] = 0.0;
  push(0.0, opt.source);
  std::uint32_t settled = 0;

  while (!ws.heap.empty()) {
    auto [d, v] = ws.heap.front();
    std::pop_heap(ws.heap.begin(), ws.heap.end(), cmp);
    ws.heap.pop_back();
    if (d > ws.dist[v]) continue;  // stale heap entry
    ++settled;
    if (v == target && !opt.want_covering) break;
    if (opt.want_covering && settled == nverts) break;
    for (int dir = 0; dir < n.n(); ++dir) {
      Vertex w = flip(v, dir);
      EdgeRef e{std::min(v, w), dir};
      double ew = weight(e);
      if (!(ew >= 0.0))  // negative weights make the relaxation cycle
        throw Error("first_passage: negative or NaN edge weight");
      double cand = d + ew;
      if (cand < ws.dist[w]) {
        ws.dist[w] = cand;
        ws.pred[w] = std::int8_t(dir);
        push(cand, w);
      }
    }
  }

  PassageResult res;
  res.t_first = ws.dist[target];
  if (!std::isfinite(res.t_first))
    throw Error("first_passage: target unreachable (non-finite distance)");

  if (opt.want_covering) {
    double cover = 0.0;
    for (std::uint32_t v = 0; v < nverts; ++v)
      cover = std::max(cover, ws.dist[v]);
    res.covering_time = cover;
  }

  if (opt.want_geodesic) {
    std::vector<Vertex> path;
    Vertex v = target;
    path.push_back(v);
    while (v != opt.source) {
      int dir = ws.pred[v];
      if (dir < 0) throw Error("first_passage: broken predecessor chain");
      v = flip(v, dir);
      path.push_back(v);
      if (path.size() > std::size_t(nverts))
        throw Error("first_passage: predecessor cycle");
    }
    std::reverse(path.begin(), path.end());

    res.per_direction_steps.assign(n.n(), 0);
    double path_sum = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
      EdgeRef e = edge_between(path[i - 1], path[i]);
      res.per_direction_steps[e.direction] += 1;
      path_sum += weight(e);
      if (hamming_distance(path[i], target) >
          hamming_distance(path[i - 1], target))
        res.backsteps += 1;
    }
    res.geodesic_length = int(path.size()) - 1;
    // pathwise consistency: the label of the target is the sum of its
    // geodesic's weights
    double scale = std::max(1.0, std::abs(res.t_first));
    if (std::abs(path_sum - res.t_first) > 1e-9 * scale)
      throw Error("first_passage: geodesic weight sum disagrees with label");
    res.geodesic = std::move(path);
  }
  return res;
};

inline PassageResult first_passage(const WeightModel& model,
                                   PassageOptions opt = {},
                                   FppWorkspace* ws = nullptr) {
  return first_passage(model.dim(), std::cref(model), opt, ws);
}

// Exhaustive minimum over simple paths; exact reference for n <= 3.  The
// running sum is accumulated source-to-target in path order, which is the
// same floating-point order Dijkstra uses, so agreement is exact.
template <class WeightFn>
double brute_force_passage(Dim n, WeightFn&& weight, Vertex source,
                           Vertex target) {
  if (n.n() > 3)
    throw ConfigError("brute_force_passage: exhaustive search needs n <= 3");
  const std::uint32_t nverts = n.vertex_count();
  if (source >= nverts || target >= nverts)
    throw ConfigError("brute_force_passage: source/target out of range");
  double best = std::numeric_limits<double>::infinity();
  auto dfs = [&](auto&& self, Vertex v, std::uint32_t visited,
                 double acc) -> void {
    if (v == target) {
      best = std::min(best, acc);
      return;
    }
    if (acc >= best) return;  // weights are positive
    for (int dir = 0; dir < n.n(); ++dir) {
      Vertex w = flip(v, dir);
      if (visited & (std::uint32_t{1} << w)) continue;
      EdgeRef e{std::min(v, w), dir};
      self(self, w, visited | (std::uint32_t{1} << w), acc + weight(e));
    }
  };
  dfs(dfs, source, std::uint32_t{1} << source, 0.0);
  return best;
}

struct GeodesicStats {
  int length = 0;
  int backsteps = 0;
  std::vector<int> per_direction_steps;
  double length_over_n = 0.0;
};

// Independent recount from the path itself (not from PassageResult's own
// counters).
inline GeodesicStats geodesic_stats(const PassageResult& r, Dim n) {
  if (r.geodesic.empty())
    throw ConfigError("geodesic_stats: result has no geodesic");
  GeodesicStats gs;
  gs.per_direction_steps.assign(n.n(), 0);
  Vertex target = r.geodesic.back();
  for (std::size_t i = 1; i < r.geodesic.size(); ++i) {
    EdgeRef e = edge_between(r.geodesic[i - 1], r.geodesic[i]);
    gs.per_direction_steps[e.direction] += 1;
    if (hamming_distance(r.geodesic[i], target) >
        hamming_distance(r.geodesic[i - 1], target))
      gs.backsteps += 1;
  }
  gs.length = int(r.geodesic.size()) - 1;
  gs.length_over_n = double(gs.length) / n.n();
  return gs;
}

}  // namespace cubefpp
