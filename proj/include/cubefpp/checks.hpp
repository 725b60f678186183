#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cubefpp/analytic.hpp"
#include "cubefpp/analytic_oracle.hpp"
#include "cubefpp/btp.hpp"
#include "cubefpp/experiments.hpp"
#include "cubefpp/fpp.hpp"
#include "cubefpp/hypercube.hpp"
#include "cubefpp/io.hpp"
#include "cubefpp/rng.hpp"
#include "cubefpp/stats.hpp"
#include "cubefpp/walks.hpp"

// Runtime invariant suite behind the `verify` subcommand.  Each check is
// self-contained and reports pass/fail plus a short diagnostic.  The
// inject_corrupt_weight switch deliberately breaks one edge weight so the
// suite can prove it would notice (the run must then fail).

namespace cubefpp {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int oracle_seeds = 100;        // per dimension in {1,2,3}
  int triangle_n = 7;            // exhaustive triangle-inequality size
  std::uint64_t btp_runs = 400;  // n=3 coupling-invariant runs
  std::uint64_t walk_trials = 4000;
  bool inject_corrupt_weight = false;
};

namespace checks_detail {

template <class F>
CheckResult run_check(const std::string& name, F&& body) {
  CheckResult r;
  r.name = name;
  try {
    std::string detail = body();
    r.pass = true;
    r.detail = detail;
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = e.what();
  }
  return r;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

inline std::string fmt(double x) { return format_double(x); }

// Weight function for a (n, seed) pair; optionally corrupts one edge.
struct CheckWeights {
  Dim dim;
  std::uint64_t key;
  bool corrupt;
  double operator()(EdgeRef e) const {
    EdgeIndex idx = edge_index(e, dim);
    double w = exp1_from_bits(prf64(key, idx));
    if (corrupt && idx == 1) return -w;
    return w;
  }
};

inline CheckWeights make_weights(Dim dim, std::uint64_t seed, bool corrupt) {
  return CheckWeights{dim, prf64(seed, kStreamWeights), corrupt};
}

}  // namespace checks_detail

inline std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
  using namespace checks_detail;
  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, auto&& body) {
    out.push_back(run_check(name, body));
  };
  const double th = theta();

  // ---- hypercube -----------------------------------------------------------

  add("hypercube/edge_bijection", [&] {
    for (int n : {1, 2, 5, 12}) {
      Dim d(n);
      for (EdgeIndex idx = 0; idx < d.edge_count(); ++idx) {
        EdgeRef e = edge_from_index(idx, d);
        check_edge(e, d);
        require(edge_index(e, d) == idx, "bijection broken at n=" +
                                             std::to_string(n) + " idx=" +
                                             std::to_string(idx));
      }
      for (Vertex v = 0; v < d.vertex_count(); ++v)
        for (int dir = 0; dir < n; ++dir) {
          EdgeRef e = edge_between(v, flip(v, dir));
          EdgeIndex idx = edge_index(e, d);
          require(idx < d.edge_count(), "index out of range");
          EdgeRef back = edge_from_index(idx, d);
          require(back == e, "round-trip broken");
        }
    }
    return std::string("exhaustive at n in {1,2,5,12}");
  });

  add("hypercube/adjacency", [&] {
    Dim d(5);
    for (Vertex v = 0; v < d.vertex_count(); ++v)
      for (int dir = 0; dir < d.n(); ++dir) {
        Vertex w = flip(v, dir);
        require(hamming_distance(v, w) == 1, "flip is not an edge");
        require(std::abs(hamming_weight(w) - hamming_weight(v)) == 1,
                "flip changed weight by != 1");
        require(flip(w, dir) == v, "flip is not an involution");
      }
    return std::string("exhaustive at n=5");
  });

  // ---- weights -------------------------------------------------------------

  add("weights/stored_equals_derived", [&] {
    Dim d(10);
    WeightModel stored(d, opt.seed, WeightScheme::Stored);
    WeightModel derived(d, opt.seed, WeightScheme::Derived);
    for (EdgeIndex i = 0; i < d.edge_count(); ++i)
      require(stored.by_index(i) == derived.by_index(i),
              "schemes disagree at index " + std::to_string(i));
    return std::string("pointwise identical at n=10");
  });

  add("weights/positive_and_deterministic", [&] {
    Dim d(14);
    auto w = make_weights(d, opt.seed, opt.inject_corrupt_weight);
    auto w2 = make_weights(d, opt.seed, opt.inject_corrupt_weight);
    for (EdgeIndex i = 0; i < d.edge_count(); ++i) {
      EdgeRef e = edge_from_index(i, d);
      double x = w(e);
      require(std::isfinite(x) && x > 0.0,
              "weight not positive/finite at index " + std::to_string(i) +
                  ": " + fmt(x));
      require(w2(e) == x, "weight not reproducible");
    }
    return std::string("all 114688 weights at n=14");
  });

  add("weights/unit_mean", [&] {
    Dim d(14);
    auto w = make_weights(d, opt.seed, false);
    double sum = 0.0;
    for (EdgeIndex i = 0; i < d.edge_count(); ++i)
      sum += w(edge_from_index(i, d));
    double mean = sum / double(d.edge_count());
    require(std::abs(mean - 1.0) < 0.01,
            "Exp(1) sample mean off: " + fmt(mean));
    return "mean=" + fmt(mean);
  });

  // ---- first passage ---------------------------------------------------------

  add("fpp/oracle_agreement", [&] {
    for (int n = 1; n <= 3; ++n) {
      Dim d(n);
      for (int s = 0; s < opt.oracle_seeds; ++s) {
        auto w = make_weights(d, trial_seed(opt.seed, s, kStreamFpp),
                              opt.inject_corrupt_weight);
        PassageResult r = first_passage(d, w);
        double ref = brute_force_passage(d, w, 0, d.one());
        require(r.t_first == ref,
                "mismatch at n=" + std::to_string(n) + " seed#" +
                    std::to_string(s) + ": dijkstra=" + fmt(r.t_first) +
                    " oracle=" + fmt(ref));
      }
    }
    return std::to_string(3 * opt.oracle_seeds) + " exact matches";
  });

  add("fpp/triangle_inequality", [&] {
    Dim d(opt.triangle_n);
    const std::uint32_t nv = d.vertex_count();
    auto w = make_weights(d, opt.seed, opt.inject_corrupt_weight);
    std::vector<std::vector<double>> dist(nv);
    FppWorkspace ws;
    for (Vertex src = 0; src < nv; ++src) {
      PassageOptions po;
      po.source = src;
      po.want_geodesic = false;
      po.want_covering = true;  // full relaxation
      first_passage(d, w, po, &ws);
      dist[src] = ws.dist;
    }
    for (Vertex u = 0; u < nv; ++u)
      for (Vertex v = 0; v < nv; ++v)
        for (Vertex x = 0; x < nv; ++x)
          require(dist[u][x] <= dist[u][v] + dist[v][x] + 1e-9,
                  "triangle violated");
    for (Vertex u = 0; u < nv; ++u) {
      require(dist[u][u] == 0.0, "self-distance nonzero");
      for (Vertex v = 0; v < nv; ++v) {
        require(std::isfinite(dist[u][v]), "unreachable vertex");
        require(v == u || dist[u][v] > 0.0, "nonpositive distance");
      }
    }
    return "all triples at n=" + std::to_string(opt.triangle_n);
  });

  add("fpp/bidirectional", [&] {
    Dim d(8);
    for (int s = 0; s < 20; ++s) {
      auto w = make_weights(d, trial_seed(opt.seed, 100 + s, kStreamFpp), false);
      PassageOptions fwd;
      PassageOptions bwd;
      bwd.source = d.one();
      bwd.target = 0;
      double t1 = first_passage(d, w, fwd).t_first;
      double t2 = first_passage(d, w, bwd).t_first;
      require(std::abs(t1 - t2) <= 1e-12 * std::max(1.0, std::abs(t1)),
              "direction asymmetry: " + fmt(t1) + " vs " + fmt(t2));
    }
    return std::string("20 seeds at n=8");
  });

  add("fpp/permutation_symmetry", [&] {
    Dim d(8);
    std::mt19937_64 gen(opt.seed);
    for (int s = 0; s < 10; ++s) {
      auto w = make_weights(d, trial_seed(opt.seed, 200 + s, kStreamFpp), false);
      std::vector<int> perm(d.n());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), gen);
      auto permute_vertex = [&](Vertex v) {
        Vertex r = 0;
        for (int i = 0; i < d.n(); ++i)
          if ((v >> i) & 1u) r |= Vertex{1} << perm[i];
        return r;
      };
      auto wp = [&](EdgeRef e) {
        Vertex a = permute_vertex(e.base);
        Vertex b = permute_vertex(flip(e.base, e.direction));
        return w(edge_between(a, b));
      };
      double t1 = first_passage(d, w).t_first;
      double t2 = first_passage(d, wp).t_first;
      require(t1 == t2, "coordinate relabeling changed t_first: " + fmt(t1) +
                            " vs " + fmt(t2));
    }
    return std::string("10 random relabelings at n=8");
  });

  add("fpp/geodesic_consistency", [&] {
    Dim d(6);
    for (int s = 0; s < 50; ++s) {
      auto w = make_weights(d, trial_seed(opt.seed, 300 + s, kStreamFpp), false);
      PassageOptions po;
      po.want_covering = true;
      PassageResult r = first_passage(d, w, po);
      require(r.geodesic.front() == 0 && r.geodesic.back() == d.one(),
              "geodesic endpoints wrong");
      GeodesicStats gs = geodesic_stats(r, d);
      require(gs.length == r.geodesic_length, "length recount mismatch");
      require(gs.backsteps == r.backsteps, "backstep recount mismatch");
      require(r.geodesic_length == d.n() + 2 * r.backsteps,
              "length != n + 2*backsteps");
      for (int steps : gs.per_direction_steps)
        require(steps % 2 == 1, "even per-direction step count");
      require(r.covering_time >= r.t_first, "covering before first passage");
      for (std::size_t i = 1; i < r.geodesic.size(); ++i)
        require(hamming_distance(r.geodesic[i - 1], r.geodesic[i]) == 1,
                "geodesic step is not an edge");
    }
    return std::string("50 seeds at n=6");
  });

  // ---- analytic ----------------------------------------------------------------

  add("analytic/constants_identities", [&] {
    Constants c = constants();
    require(std::abs(std::sinh(c.theta) - 1.0) <= 1e-14, "sinh(theta) != 1");
    double b_direct = c.theta + 1.0 / (3.0 - 2.0 * std::numbers::sqrt2);
    require(std::abs(c.b_limit - b_direct) <= 1e-12, "b_limit identity broken");
    require(std::abs(c.ab_limit - (c.a_limit + b_direct)) <= 1e-12,
            "ab != a + b");
    require(std::abs(c.s_lower_limit - (1.0 - c.a_limit)) == 0.0,
            "s_lower_limit != 1 - a_limit");
    double p = c.s_lower_limit * std::exp(-c.b_limit / c.s_lower_limit);
    require(c.p_lower_limit == p, "p_lower_limit recompute mismatch");
    require(std::abs(c.geodesic_slope - std::numbers::sqrt2 * c.theta) == 0.0,
            "geodesic_slope != sqrt2 * theta");
    return "theta=" + fmt(c.theta);
  });

  add("analytic/master_equation", [&] {
    const double h = 1e-5;
    double worst = 0.0;
    for (int n : {1, 3, 6})
      for (int k = 0; k <= n; ++k)
        for (double t = 0.1; t <= 1.01; t += 0.1) {
          double fd = (occupancy_mean(n, k, t + h) -
                       occupancy_mean(n, k, t - h)) /
                      (2.0 * h);
          double cf = (k > 0 ? k * occupancy_mean(n, k - 1, t) : 0.0) +
                      (k < n ? (n - k) * occupancy_mean(n, k + 1, t) : 0.0);
          worst = std::max(worst, std::abs(cf - fd));
        }
    require(worst <= 1e-6, "master-equation residual " + fmt(worst));
    return "max residual " + fmt(worst);
  });

  add("analytic/second_derivative_sum", [&] {
    // sum_{i,j} m(v+e_i+e_j, t) equals d^2/dt^2 m(v, t); checked against a
    // 5-point finite-difference stencil, vertices enumerated explicitly
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
      Dim d(n);
      for (Vertex v = 0; v < d.vertex_count(); v += (n < 3 ? 1 : 3)) {
        for (double t = 0.15; t <= 0.96; t += 0.2) {
          double sum = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              Vertex x = v ^ (Vertex{1} << i) ^ (Vertex{1} << j);
              sum += occupancy_mean(n, hamming_weight(x), t);
            }
          const double h = 3e-3;
          auto m = [&](double tt) {
            return occupancy_mean(n, hamming_weight(v), tt);
          };
          double fd = (-m(t + 2 * h) + 16 * m(t + h) - 30 * m(t) +
                       16 * m(t - h) - m(t - 2 * h)) /
                      (12 * h * h);
          worst = std::max(worst, std::abs(sum - fd));
        }
      }
    }
    require(worst <= 1e-6, "second-derivative residual " + fmt(worst));
    return "max residual " + fmt(worst);
  });

  add("analytic/square_second_derivative_sum", [&] {
    // 1/2 d^2/dt^2 m(v,t)^2 = sum_{i,j} [ m(v+e_i+e_j) m(v) + m(v+e_i) m(v+e_j) ]
    double worst = 0.0;
    for (int n = 1; n <= 5; ++n) {
      Dim d(n);
      for (Vertex v = 0; v < d.vertex_count(); ++v)
        for (double t = 0.15; t <= 0.96; t += 0.2) {
          double sum = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              Vertex xi = v ^ (Vertex{1} << i);
              Vertex xj = v ^ (Vertex{1} << j);
              Vertex xij = xi ^ (Vertex{1} << j);
              sum += occupancy_mean(n, hamming_weight(xij), t) *
                         occupancy_mean(n, hamming_weight(v), t) +
                     occupancy_mean(n, hamming_weight(xi), t) *
                         occupancy_mean(n, hamming_weight(xj), t);
            }
          const double h = 3e-3;
          auto m2 = [&](double tt) {
            double m = occupancy_mean(n, hamming_weight(v), tt);
            return m * m;
          };
          double fd = (-m2(t + 2 * h) + 16 * m2(t + h) - 30 * m2(t) +
                       16 * m2(t - h) - m2(t - 2 * h)) /
                      (12 * h * h);
          // stencil truncation error grows with the function scale, so
          // compare relative to the sum's own magnitude
          worst = std::max(worst,
                           std::abs(sum - 0.5 * fd) / std::max(1.0, sum));
        }
    }
    require(worst <= 1e-6, "square second-derivative residual " + fmt(worst));
    return "max residual " + fmt(worst);
  });

  add("analytic/convolution_semigroup", [&] {
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n)
      for (int k = 0; k <= n; ++k)
        for (double s = 0.1; s <= 1.01; s += 0.3)
          for (double t = 0.1; t <= 1.01; t += 0.3) {
            double conv = convolve_occupancy(n, k, s, t);
            double closed = occupancy_mean(n, k, s + t);
            worst = std::max(worst, std::abs(conv - closed) / closed);
          }
    require(worst <= 1e-10, "convolution relative error " + fmt(worst));
    return "max rel err " + fmt(worst);
  });

  add("analytic/reduced_matches_bruteforce", [&] {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
      AnalyticConfig ac;
      ac.n = n;
      for (double u : {0.5, th, 1.2}) {
        double a_fast = a_expected(ac, u).value;
        double a_ref = oracle::a_brute_force(n, u, 128);
        double ab_fast = ab_expected(ac, u).value;
        double ab_ref = oracle::ab_brute_force(n, u, 128);
        worst = std::max(worst, std::abs(a_fast - a_ref) / a_ref);
        worst = std::max(worst, std::abs(ab_fast - ab_ref) / ab_ref);
      }
    }
    require(worst <= 1e-4, "reduced-vs-raw relative error " + fmt(worst));
    return "max rel err " + fmt(worst);
  });

  add("analytic/log_sinh_bound", [&] {
    for (int i = 0; i < 5000; ++i) {
      double t = th * i / 5000.0;
      double lhs = std::log(std::sinh(th - t));
      require(lhs <= -std::numbers::sqrt2 * t + 1e-12,
              "bound violated at t=" + fmt(t));
    }
    return std::string("5000-point grid on [0, theta)");
  });

  add("analytic/success_bound_monotone", [&] {
    std::mt19937_64 gen(opt.seed);
    std::uniform_real_distribution<double> ud(0.01, 10.0);
    for (int i = 0; i < 1000; ++i) {
      double bb = ud(gen);
      double s1 = ud(gen), s2 = ud(gen);
      if (s1 > s2) std::swap(s1, s2);
      double p1 = s1 * std::exp(-bb / s1);
      double p2 = s2 * std::exp(-bb / s2);
      require(p1 <= p2 * (1 + 1e-12), "x e^{-B/x} not increasing");
    }
    return std::string("1000 random (B, S1 < S2)");
  });

  // ---- branching process ---------------------------------------------------------

  add("btp/log_and_coupling_invariants", [&] {
    Dim d(3);
    ContestScratch scratch;
    std::uint64_t checked = 0;
    for (std::uint64_t r = 0; r < opt.btp_runs; ++r) {
      BtpRun run = simulate_btp(d, th, trial_seed(opt.seed, r, kStreamBtp));
      mark_alive(run);
      std::vector<int> alive_per_vertex(d.vertex_count(), 0);
      for (std::size_t i = 0; i < run.particles.size(); ++i) {
        const Particle& p = run.particles[i];
        require(p.id == i, "ids not dense");
        if (i == 0) {
          require(p.parent == -1 && p.birth == 0.0, "bad root");
        } else {
          const Particle& q = run.particles[p.parent];
          require(p.parent >= 0 && std::uint32_t(p.parent) < i,
                  "parent not earlier");
          require(p.birth > run.particles[i - 1].birth,
                  "births not strictly increasing");
          require(p.vertex == flip(q.vertex, p.direction),
                  "child vertex is not across the parent edge");
          require(p.birth > q.birth, "child born before parent");
          if (p.alive) require(q.alive, "alive child of a ghost");
        }
        if (p.alive) alive_per_vertex[p.vertex] += 1;
      }
      for (int a : alive_per_vertex)
        require(a <= 1, "two alive particles share a vertex");
      for (Vertex v = 0; v < d.vertex_count(); ++v) {
        const auto& lst = run.by_vertex[v];
        for (std::size_t i = 1; i < lst.size(); ++i)
          require(run.particles[lst[i - 1]].birth <
                      run.particles[lst[i]].birth,
                  "per-vertex list out of order");
        // alive, if present, must be the first arrival whose parent is
        // alive; every earlier arrival must therefore descend from a ghost
        for (std::uint32_t id : lst)
          if (run.particles[id].alive) {
            for (std::uint32_t other : lst) {
              if (other == id) break;
              std::int32_t par = run.particles[other].parent;
              require(par >= 0 && !run.particles[par].alive,
                      "an earlier arrival had an alive parent");
            }
            break;
          }
        // sandwich at a grid of times: uncontested <= alive-occupied <= all
        for (double t : {0.3 * th, 0.7 * th, th}) {
          int z0 = uncontested_occupancy(run, v, t, &scratch);
          int occupied = 0, total = 0;
          for (std::uint32_t id : lst) {
            if (run.particles[id].birth > t) break;
            total += 1;
            if (run.particles[id].alive) occupied = 1;
          }
          require(z0 <= 1, "two uncontested particles at one vertex");
          require(z0 <= occupied, "uncontested but not alive-occupied");
          require(occupied <= total, "occupied without particles");
          ++checked;
        }
      }
      // contest counters: split sum equals independent total; zero total
      // iff the ancestral line is simple
      for (std::uint32_t id = 0; id < run.particles.size();
           id += std::max<std::size_t>(1, run.particles.size() / 7)) {
        ContestCounts cc = contest_counts(run, id, &scratch);
        require(cc.a + cc.b == cc.c, "a + b != c");
        AncestralPath ap = ancestral_path(run, id);
        require((cc.a == 0) == ap.simple,
                "a(x)=0 does not match path simplicity");
        require(ap.length == int(ap.vertices.size()) - 1, "path length off");
        require(ap.vertices.front() == run.origin, "path does not start at origin");
        require(ap.vertices.back() == run.particles[id].vertex,
                "path does not end at the particle");
      }
    }
    return std::to_string(opt.btp_runs) + " runs, " +
           std::to_string(checked) + " sandwich points";
  });

  add("btp/occupancy_matches_mean", [&] {
    Dim d(3);
    std::uint64_t runs = std::max<std::uint64_t>(opt.btp_runs, 200);
    std::vector<std::vector<double>> counts(4);
    for (std::uint64_t r = 0; r < runs; ++r) {
      BtpRun run = simulate_btp(d, th, trial_seed(opt.seed ^ 0xabcd, r, kStreamBtp));
      std::vector<int> per_vertex(d.vertex_count(), 0);
      for (const Particle& p : run.particles) per_vertex[p.vertex] += 1;
      for (Vertex v = 0; v < d.vertex_count(); ++v)
        counts[hamming_weight(v)].push_back(double(per_vertex[v]));
    }
    std::string detail;
    for (int k = 0; k <= 3; ++k) {
      MetricSummary s = summarize("k", counts[k]);
      double expected = occupancy_mean(3, k, th);
      double z = (s.mean - expected) / s.std_error;
      require(std::abs(z) < 4.0, "occupancy z-score " + fmt(z) +
                                      " at class " + std::to_string(k));
      detail += "z(k=" + std::to_string(k) + ")=" + fmt(z) + " ";
    }
    return detail;
  });

  add("btp/dump_roundtrip", [&] {
    Dim d(3);
    BtpRun run = simulate_btp(d, th + 0.5, trial_seed(opt.seed, 7, kStreamBtp));
    mark_alive(run);
    std::ostringstream first;
    dump_run(run, first);
    std::istringstream input(first.str());
    BtpRun loaded = load_run(input);
    std::ostringstream second;
    dump_run(loaded, second);
    require(first.str() == second.str(), "dump -> load -> dump not identity");
    require(loaded.particles.size() == run.particles.size(), "size changed");
    for (std::size_t i = 0; i < run.particles.size(); ++i) {
      const Particle &a = run.particles[i], &b = loaded.particles[i];
      require(a.birth == b.birth && a.vertex == b.vertex &&
                  a.parent == b.parent && a.direction == b.direction &&
                  a.alive == b.alive,
              "particle record changed in round-trip");
    }
    return std::to_string(run.particles.size()) + " particles round-tripped";
  });

  add("btp/cap_reports_partial", [&] {
    Dim d(3);
    BtpCaps caps;
    caps.max_particles = 10;
    try {
      simulate_btp(d, 5.0, opt.seed, 0, caps);
      throw Error("cap was not enforced");
    } catch (const BtpCapExceeded& e) {
      require(e.partial != nullptr, "no partial run attached");
      require(e.partial->truncated, "partial run not flagged truncated");
      require(e.partial->particles.size() == 10, "partial size wrong");
    }
    return std::string("cap=10 enforced with partial log");
  });

  // ---- walks ----------------------------------------------------------------

  add("walks/parity_endpoint_backsteps", [&] {
    CounterRng rng(trial_seed(opt.seed, 0, kStreamWalk));
    for (int trial = 0; trial < 500; ++trial) {
      int n = 1 + int(rng() % 12);
      WalkPath p = sample_conditioned_walk(n, th, rng);
      WalkStats st = walk_stats(p);
      for (int c : st.per_coordinate)
        require(c % 2 == 1, "even per-coordinate count");
      require(endpoint_is_all_ones(p), "walk does not end at all-ones");
      require(st.length == n + 2 * st.backsteps, "length != n + 2*backsteps");
      for (std::size_t i = 1; i < p.events.size(); ++i)
        require(p.events[i].time > p.events[i - 1].time,
                "event times not strictly increasing");
    }
    return std::string("500 walks, n in [1,12]");
  });

  add("walks/odd_poisson_gof", [&] {
    CounterRng rng(trial_seed(opt.seed, 1, kStreamWalk));
    std::uint64_t draws = std::max<std::uint64_t>(opt.walk_trials, 2000);
    std::vector<double> observed(5, 0.0);  // bins: 1,3,5,7,>=9
    for (std::uint64_t i = 0; i < draws; ++i) {
      int k = sample_odd_poisson(th, rng);
      observed[std::min<std::size_t>((k - 1) / 2, 4)] += 1.0;
    }
    std::vector<double> expected(5, 0.0);
    double norm = std::sinh(th);
    double cum = 0.0;
    for (int b = 0; b < 4; ++b) {
      int k = 2 * b + 1;
      double pk = std::pow(th, k) / (std::tgamma(k + 1.0) * norm);
      expected[b] = pk * double(draws);
      cum += pk;
    }
    expected[4] = std::max((1.0 - cum) * double(draws), 1e-6);
    // merge the sparse tail into the previous bin for chi-square validity
    if (expected[4] < 5.0) {
      expected[3] += expected[4];
      observed[3] += observed[4];
      expected.pop_back();
      observed.pop_back();
    }
    Chi2Result c2 = chi2_gof(observed, expected);
    require(c2.p_value >= 0.01,
            "chi-square p=" + fmt(c2.p_value) + " stat=" + fmt(c2.statistic));
    return "p=" + fmt(c2.p_value);
  });

  add("walks/step_mean", [&] {
    CounterRng rng(trial_seed(opt.seed, 2, kStreamWalk));
    std::uint64_t draws = std::max<std::uint64_t>(opt.walk_trials, 2000);
    std::vector<double> ks(draws);
    for (auto& k : ks) k = double(sample_odd_poisson(th, rng));
    MetricSummary s = summarize("k", ks);
    double expected = th / std::tanh(th);  // = sqrt(2) theta at theta
    double z = (s.mean - expected) / s.std_error;
    require(std::abs(z) < 4.0, "step mean z=" + fmt(z));
    return "mean=" + fmt(s.mean) + " expected=" + fmt(expected) +
           " z=" + fmt(z);
  });

  // ---- statistics ----------------------------------------------------------------

  add("stats/ks_calibration", [&] {
    CounterRng rng(opt.seed);
    std::vector<double> a(3000), b(3000), c(3000);
    for (auto& x : a) x = rng.exp1();
    for (auto& x : b) x = rng.exp1();
    for (auto& x : c) x = 0.5 * rng.exp1();  // Exp(2)
    KsResult same = ks_two_sample(a, b);
    KsResult diff = ks_two_sample(a, c);
    require(same.p_value > 0.01, "same-law KS rejected: p=" + fmt(same.p_value));
    require(diff.p_value < 0.01,
            "different-law KS not rejected: p=" + fmt(diff.p_value));
    return "same p=" + fmt(same.p_value) + ", diff p=" + fmt(diff.p_value);
  });

  // ---- experiments ------------------------------------------------------------

  add("experiments/thread_determinism", [&] {
    ExperimentConfig cfg;
    cfg.n = 6;
    cfg.trials = 64;
    cfg.seed = opt.seed;
    cfg.threads = 1;
    FppBatch b1 = run_fpp(cfg);
    std::string csv1 = render_csv(fpp_doc(cfg, b1));
    std::string json1 = render_json(fpp_doc(cfg, b1));
    cfg.threads = 4;
    FppBatch b4 = run_fpp(cfg);
    std::string csv4 = render_csv(fpp_doc(cfg, b4));
    std::string json4 = render_json(fpp_doc(cfg, b4));
    require(csv1 == csv4, "CSV differs between 1 and 4 threads");
    require(json1 == json4, "JSON differs between 1 and 4 threads");
    return std::to_string(csv1.size()) + " bytes identical";
  });

  add("experiments/config_roundtrip", [&] {
    ExperimentConfig cfg;
    cfg.n = 9;
    cfg.trials = 123;
    cfg.seed = 77;
    cfg.u = 0.75;
    cfg.covering = true;
    cfg.p_orders = {2};
    cfg.threads = 3;
    cfg.format = "json";
    cfg.out = "x.json";
    auto j = cfg.to_json();
    ExperimentConfig back = ExperimentConfig::from_json(j);
    require(back.to_json() == j, "config JSON round-trip not lossless");
    return std::string("lossless");
  });

  add("experiments/deviation_identities", [&] {
    ExperimentConfig cfg;
    cfg.n = 5;
    cfg.trials = 200;
    cfg.seed = opt.seed;
    FppBatch b = run_fpp(cfg);
    DeviationSummary dev = deviation_summary(b.t_first, th);
    require(dev.l1 <= dev.l2 * (1 + 1e-12), "L1 > L2");
    require(std::abs((dev.mean_plus - dev.mean_minus) -
                     (summarize("t", b.t_first).mean - th)) < 1e-12,
            "mean decomposition broken");
    require(std::abs((dev.mean_plus + dev.mean_minus) - dev.l1) < 1e-12,
            "L1 decomposition broken");
    return std::string("plus/minus decomposition holds");
  });

  return out;
}

}  // namespace cubefpp
