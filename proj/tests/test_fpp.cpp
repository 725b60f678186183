#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "cubefpp/fpp.hpp"

using namespace cubefpp;

namespace {

// explicit weight table for worked examples
struct TableWeights {
  Dim dim;
  std::map<std::pair<Vertex, Vertex>, double> table;
  double operator()(EdgeRef e) const {
    Vertex a = e.base, b = flip(e.base, e.direction);
    auto it = table.find({a, b});
    if (it == table.end()) throw Error("missing weight in test table");
    return it->second;
  }
};

}  // namespace

TEST_CASE("n=1 passage is the single edge weight", "[fpp]") {
  Dim d(1);
  auto w = [](EdgeRef) { return 0.42; };
  PassageResult r = first_passage(d, w);
  CHECK(r.t_first == 0.42);
  REQUIRE(r.geodesic.size() == 2);
  CHECK(r.geodesic[0] == 0);
  CHECK(r.geodesic[1] == 1);
  CHECK(r.geodesic_length == 1);
  CHECK(r.backsteps == 0);
}

TEST_CASE("n=2 worked example picks the cheaper side", "[fpp]") {
  Dim d(2);
  TableWeights w{d, {{{0b00, 0b01}, 0.3},
                     {{0b01, 0b11}, 0.4},
                     {{0b00, 0b10}, 0.2},
                     {{0b10, 0b11}, 0.6}}};
  PassageResult r = first_passage(d, w);
  CHECK(r.t_first == Catch::Approx(0.7).margin(1e-15));
  REQUIRE(r.geodesic.size() == 3);
  CHECK(r.geodesic[0] == 0b00);
  CHECK(r.geodesic[1] == 0b01);
  CHECK(r.geodesic[2] == 0b11);
  // brute force agrees on the same table
  CHECK(brute_force_passage(d, w, 0, d.one()) == r.t_first);
}

TEST_CASE("dijkstra equals exhaustive search exactly", "[fpp]") {
  for (int n = 1; n <= 3; ++n) {
    Dim d(n);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      WeightModel w(d, seed);
      PassageResult r = first_passage(d, w);
      CHECK(r.t_first == brute_force_passage(d, w, 0, d.one()));
    }
  }
}

TEST_CASE("stored and derived schemes give identical passage", "[fpp]") {
  Dim d(9);
  for (std::uint64_t seed : {1ull, 99ull}) {
    WeightModel stored(d, seed, WeightScheme::Stored);
    WeightModel derived(d, seed, WeightScheme::Derived);
    PassageResult a = first_passage(d, stored);
    PassageResult b = first_passage(d, derived);
    CHECK(a.t_first == b.t_first);
    CHECK(a.geodesic == b.geodesic);
  }
}

TEST_CASE("weight model enforces budget and bounds", "[fpp]") {
  CHECK_THROWS_AS(WeightModel(Dim(28), 1, WeightScheme::Stored, 1 << 20),
                  CapExceeded);
  WeightModel ok(Dim(28), 1, WeightScheme::Derived, 1 << 20);  // no table
  CHECK(ok.by_index(0) > 0.0);
  WeightModel small(Dim(3), 1);
  CHECK_THROWS_AS(small.by_index(12), ConfigError);
}

TEST_CASE("geodesic parity and direction counts", "[fpp]") {
  Dim d(7);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    WeightModel w(d, seed);
    PassageResult r = first_passage(d, w);
    CHECK(r.geodesic_length == d.n() + 2 * r.backsteps);
    REQUIRE(int(r.per_direction_steps.size()) == d.n());
    for (int steps : r.per_direction_steps) CHECK(steps % 2 == 1);
    GeodesicStats gs = geodesic_stats(r, d);
    CHECK(gs.length == r.geodesic_length);
    CHECK(gs.backsteps == r.backsteps);
    CHECK(gs.length_over_n == Catch::Approx(double(gs.length) / d.n()));
  }
}

TEST_CASE("covering time relates to per-target passages", "[fpp]") {
  Dim d(4);
  WeightModel w(d, 5);
  PassageOptions po;
  po.want_covering = true;
  PassageResult r = first_passage(d, w, po);
  double max_t = 0.0;
  for (Vertex v = 1; v < d.vertex_count(); ++v) {
    PassageOptions single;
    single.target = v;
    single.want_geodesic = false;
    max_t = std::max(max_t, first_passage(d, w, single).t_first);
  }
  CHECK(r.covering_time == max_t);
  CHECK(r.covering_time >= r.t_first);
  // without the flag the field stays NaN
  PassageResult r2 = first_passage(d, w);
  CHECK(std::isnan(r2.covering_time));
}

TEST_CASE("source equals target short-circuits", "[fpp]") {
  Dim d(3);
  WeightModel w(d, 2);
  PassageOptions po;
  po.source = 5;
  po.target = 5;
  PassageResult r = first_passage(d, w, po);
  CHECK(r.t_first == 0.0);
  REQUIRE(r.geodesic.size() == 1);
  CHECK(r.geodesic[0] == 5);
  CHECK(r.geodesic_length == 0);
}

TEST_CASE("memory budget rejects oversized instances", "[fpp]") {
  Dim d(20);
  auto w = [](EdgeRef) { return 1.0; };
  PassageOptions po;
  po.memory_budget = 1024;
  CHECK_THROWS_AS(first_passage(d, w, po), CapExceeded);
}

TEST_CASE("brute force oracle input validation", "[fpp]") {
  auto w = [](EdgeRef) { return 1.0; };
  CHECK_THROWS_AS(brute_force_passage(Dim(4), w, 0, 15), ConfigError);
  CHECK(brute_force_passage(Dim(2), w, 0, 3) == 2.0);
}

TEST_CASE("workspace reuse does not change results", "[fpp]") {
  Dim d(8);
  FppWorkspace ws;
  std::vector<double> with_ws, without_ws;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    WeightModel w(d, seed);
    with_ws.push_back(first_passage(d, w, {}, &ws).t_first);
    without_ws.push_back(first_passage(d, w).t_first);
  }
  CHECK(with_ws == without_ws);
}
