#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "cubefpp/common.hpp"

// Vertices of the n-dimensional hypercube are n-bit masks; moving along
// direction d flips bit d.  Edges get a dense index in [0, n*2^(n-1)).

namespace cubefpp {

using Vertex = std::uint32_t;
using EdgeIndex = std::uint64_t;

inline constexpr int kMaxDim = 30;

// Validated dimension.  The cap keeps 2^n vertex tables and n*2^(n-1) edge
// tables inside sane address ranges; per-call memory budgets are enforced at
// the allocation sites that actually materialize those tables.
class Dim {
 public:
  explicit Dim(int n) : n_(n) {
    if (n < 1 || n > kMaxDim)
      throw ConfigError("dimension must be in [1, " + std::to_string(kMaxDim) +
                        "], got " + std::to_string(n));
  }
  int n() const { return n_; }
  std::uint32_t vertex_count() const { return std::uint32_t{1} << n_; }
  std::uint64_t edge_count() const {
    return std::uint64_t(n_) << (n_ - 1);
  }
  Vertex zero() const { return 0; }
  Vertex one() const { return vertex_count() - 1; }  // all-ones corner

 private:
  int n_;
};

inline int hamming_weight(Vertex v) { return std::popcount(v); }
inline int hamming_distance(Vertex v, Vertex w) { return std::popcount(v ^ w); }

inline Vertex flip(Vertex v, int direction) {
  return v ^ (Vertex{1} << direction);
}

inline std::vector<Vertex> neighbors(Vertex v, Dim d) {
  std::vector<Vertex> out;
  out.reserve(d.n());
  for (int i = 0; i < d.n(); ++i) out.push_back(flip(v, i));
  return out;
}

// Undirected edge, canonically keyed by the endpoint whose direction bit is
// clear.  {v, v^e_d} and {v^e_d, v} are the same edge.
struct EdgeRef {
  Vertex base;    // endpoint with bit `direction` clear
  int direction;  // which bit the edge flips

  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

inline EdgeRef edge_between(Vertex v, Vertex w) {
  Vertex diff = v ^ w;
  if (std::popcount(diff) != 1)
    throw ConfigError("edge_between: vertices are not adjacent");
  int d = std::countr_zero(diff);
  return EdgeRef{v & ~diff, d};
}

inline void check_edge(EdgeRef e, Dim dim) {
  if (e.direction < 0 || e.direction >= dim.n())
    throw ConfigError("edge direction out of range");
  if (e.base >= dim.vertex_count())
    throw ConfigError("edge base out of range");
  if ((e.base >> e.direction) & 1u)
    throw ConfigError("edge base must have its direction bit clear");
}

// Bijection onto [0, n*2^(n-1)).  Within a direction d, bases are ranked by
// deleting bit d (which is zero for a canonical base).
inline EdgeIndex edge_index(EdgeRef e, Dim dim) {
  check_edge(e, dim);
  Vertex low = e.base & ((Vertex{1} << e.direction) - 1);
  Vertex high = e.base >> (e.direction + 1);
  std::uint64_t rank = low | (std::uint64_t(high) << e.direction);
  return (std::uint64_t(e.direction) << (dim.n() - 1)) + rank;
}

inline EdgeRef edge_from_index(EdgeIndex idx, Dim dim) {
  if (idx >= dim.edge_count()) throw ConfigError("edge index out of range");
  std::uint64_t per_dir = std::uint64_t{1} << (dim.n() - 1);
  int d = int(idx / per_dir);
  std::uint64_t rank = idx % per_dir;
  Vertex low = Vertex(rank & ((std::uint64_t{1} << d) - 1));
  Vertex high = Vertex(rank >> d);
  return EdgeRef{Vertex(low | (high << (d + 1))), d};
}

}  // namespace cubefpp
