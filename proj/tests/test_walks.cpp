#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cubefpp/analytic.hpp"
#include "cubefpp/stats.hpp"
#include "cubefpp/walks.hpp"

using namespace cubefpp;

TEST_CASE("odd poisson sampler basics", "[walks]") {
  CounterRng rng(1);
  for (int i = 0; i < 5000; ++i) {
    int k = sample_odd_poisson(theta(), rng);
    CHECK(k >= 1);
    CHECK(k % 2 == 1);
  }
  CounterRng r2(1);
  CounterRng r3(1);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_odd_poisson(0.5, r2) == sample_odd_poisson(0.5, r3));
  CHECK_THROWS_AS(sample_odd_poisson(0.0, rng), ConfigError);
  CHECK_THROWS_AS(sample_odd_poisson(701.0, rng), ConfigError);
}

TEST_CASE("odd poisson mean is rate*coth(rate)", "[walks]") {
  // E[k | k odd] = rate cosh(rate) / sinh(rate); at rate=theta this equals
  // sqrt(2) theta because cosh(theta) = sqrt(2), sinh(theta) = 1
  for (double rate : {theta(), 2.5}) {
    CounterRng rng(99);
    const int m = 40000;
    std::vector<double> ks(m);
    for (auto& k : ks) k = double(sample_odd_poisson(rate, rng));
    MetricSummary s = summarize("k", ks);
    double expected = rate * std::cosh(rate) / std::sinh(rate);
    double z = (s.mean - expected) / s.std_error;
    INFO("rate=" << rate << " mean=" << s.mean << " expected=" << expected);
    CHECK(std::abs(z) < 4.0);
  }
}

TEST_CASE("odd poisson rejection path at large rate", "[walks]") {
  CounterRng rng(7);
  const double rate = 50.0;
  const int m = 3000;
  std::vector<double> ks(m);
  for (auto& k : ks) {
    int v = sample_odd_poisson(rate, rng);
    CHECK(v % 2 == 1);
    k = double(v);
  }
  MetricSummary s = summarize("k", ks);
  double expected = rate * std::cosh(rate) / std::sinh(rate);  // ~= 50
  double z = (s.mean - expected) / s.std_error;
  CHECK(std::abs(z) < 4.0);
}

TEST_CASE("odd poisson matches its pmf at theta", "[walks]") {
  // P(1) = theta / sinh(theta) = theta since sinh(theta) = 1
  CounterRng rng(3);
  const int m = 50000;
  int ones = 0, threes = 0;
  for (int i = 0; i < m; ++i) {
    int k = sample_odd_poisson(theta(), rng);
    ones += (k == 1);
    threes += (k == 3);
  }
  double th = theta();
  double p1 = th;
  double p3 = th * th * th / 6.0;
  double se1 = std::sqrt(p1 * (1 - p1) / m);
  double se3 = std::sqrt(p3 * (1 - p3) / m);
  CHECK(std::abs(double(ones) / m - p1) < 4.0 * se1);
  CHECK(std::abs(double(threes) / m - p3) < 4.0 * se3);
}

TEST_CASE("conditioned walk structure", "[walks]") {
  CounterRng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + int(rng() % 10);
    WalkPath p = sample_conditioned_walk(n, theta(), rng);
    CHECK(p.n == n);
    CHECK(endpoint_is_all_ones(p));
    WalkStats st = walk_stats(p);
    REQUIRE(int(st.per_coordinate.size()) == n);
    int total = 0;
    for (int c : st.per_coordinate) {
      CHECK(c % 2 == 1);
      total += c;
    }
    CHECK(st.length == total);
    CHECK(st.length == n + 2 * st.backsteps);
    CHECK(st.length_over_n == Catch::Approx(double(st.length) / n));
    for (std::size_t i = 0; i < p.events.size(); ++i) {
      CHECK(p.events[i].time > 0.0);
      CHECK(p.events[i].time < p.t_end);
      if (i > 0) CHECK(p.events[i].time > p.events[i - 1].time);
    }
  }
}

TEST_CASE("walks work beyond the simulation dimension cap", "[walks]") {
  CounterRng rng(11);
  WalkPath p = sample_conditioned_walk(150, theta(), rng);
  CHECK(p.endpoint_mask.size() == 3);  // 150 coordinates, 64-bit words
  CHECK(endpoint_is_all_ones(p));
  WalkStats st = walk_stats(p);
  CHECK(st.length >= 150);
}

TEST_CASE("walk validation", "[walks]") {
  CounterRng rng(1);
  CHECK_THROWS_AS(sample_conditioned_walk(0, 1.0, rng), ConfigError);
  CHECK_THROWS_AS(sample_conditioned_walk(3, 0.0, rng), ConfigError);
}

TEST_CASE("oriented walk frequency matches the mass ratio", "[walks]") {
  // a walk is oriented iff every coordinate flips exactly once, so the
  // frequency of length-n walks estimates (t/sinh t)^n
  CounterRng rng(17);
  const int m = 20000;
  int oriented = 0;
  for (int i = 0; i < m; ++i) {
    WalkPath p = sample_conditioned_walk(3, theta(), rng);
    oriented += (int(p.events.size()) == 3);
  }
  double expected = oriented_mass_ratio(3, theta());  // = theta^3
  double freq = double(oriented) / m;
  double se = std::sqrt(expected * (1 - expected) / m);
  INFO("freq=" << freq << " expected=" << expected);
  CHECK(std::abs(freq - expected) < 4.0 * se);
}
