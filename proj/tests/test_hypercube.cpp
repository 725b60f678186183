#include <catch2/catch_amalgamated.hpp>

#include "cubefpp/hypercube.hpp"

using namespace cubefpp;

TEST_CASE("dimension validation", "[hypercube]") {
  CHECK_THROWS_AS(Dim(0), ConfigError);
  CHECK_THROWS_AS(Dim(-3), ConfigError);
  CHECK_THROWS_AS(Dim(31), ConfigError);
  CHECK(Dim(1).vertex_count() == 2);
  CHECK(Dim(1).edge_count() == 1);
  CHECK(Dim(10).vertex_count() == 1024);
  CHECK(Dim(10).edge_count() == 10 * 512);
  CHECK(Dim(30).vertex_count() == (std::uint32_t{1} << 30));
  CHECK(Dim(3).one() == 7);
  CHECK(Dim(3).zero() == 0);
}

TEST_CASE("hamming weight and distance", "[hypercube]") {
  CHECK(hamming_weight(0) == 0);
  CHECK(hamming_weight(0b1011) == 3);
  CHECK(hamming_distance(0b1011, 0b0011) == 1);
  CHECK(hamming_distance(0, 0b111) == 3);
  for (Vertex v = 0; v < 64; ++v) CHECK(hamming_distance(v, v) == 0);
}

TEST_CASE("flip and neighbors", "[hypercube]") {
  Dim d(4);
  for (Vertex v = 0; v < d.vertex_count(); ++v) {
    auto nb = neighbors(v, d);
    REQUIRE(nb.size() == 4);
    for (int dir = 0; dir < 4; ++dir) {
      CHECK(nb[dir] == flip(v, dir));
      CHECK(hamming_distance(v, nb[dir]) == 1);
    }
  }
}

TEST_CASE("edge_between canonicalizes", "[hypercube]") {
  EdgeRef e1 = edge_between(0b010, 0b011);
  EdgeRef e2 = edge_between(0b011, 0b010);
  CHECK(e1 == e2);
  CHECK(e1.base == 0b010);
  CHECK(e1.direction == 0);
  CHECK_THROWS_AS(edge_between(0b000, 0b011), ConfigError);
  CHECK_THROWS_AS(edge_between(0b010, 0b010), ConfigError);
}

TEST_CASE("edge index is a bijection", "[hypercube]") {
  for (int n : {1, 2, 3, 7, 11}) {
    Dim d(n);
    std::vector<bool> seen(d.edge_count(), false);
    for (Vertex v = 0; v < d.vertex_count(); ++v)
      for (int dir = 0; dir < n; ++dir) {
        Vertex w = flip(v, dir);
        if (w < v) continue;  // count each edge once
        EdgeIndex idx = edge_index(EdgeRef{v, dir}, d);
        REQUIRE(idx < d.edge_count());
        CHECK(!seen[idx]);
        seen[idx] = true;
        EdgeRef back = edge_from_index(idx, d);
        CHECK(back.base == v);
        CHECK(back.direction == dir);
      }
    for (bool s : seen) CHECK(s);
  }
}

TEST_CASE("edge index rejects non-canonical refs", "[hypercube]") {
  Dim d(3);
  // base must have a 0 bit in the edge direction
  CHECK_THROWS_AS(edge_index(EdgeRef{0b001, 0}, d), ConfigError);
  CHECK_THROWS_AS(edge_index(EdgeRef{0, 3}, d), ConfigError);
  CHECK_THROWS_AS(edge_index(EdgeRef{8, 0}, d), ConfigError);
}
