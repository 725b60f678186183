#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "cubefpp/common.hpp"
#include "cubefpp/hypercube.hpp"
#include "cubefpp/rng.hpp"

// Branching translation process on the cube: every particle spawns children
// across each incident edge at unit rate, forever.  A run is the full birth
// log up to a horizon.  On top of the log:
//
//   * mark_alive realizes the embedded growth model (a child is alive iff
//     its parent is alive and its vertex has no alive occupant yet), so the
//     alive set grows exactly like first passage / Richardson infection;
//   * contest counters a/b/c count, over the ancestral line of a particle,
//     earlier-born cohabitants -- split by whether the earlier particle is
//     itself on that line;
//   * uncontested particles (c = 0) witness the lower bound of the
//     sandwich  uncontested <= alive-occupied <= all particles.

namespace cubefpp {

struct Particle {
  std::uint32_t id = 0;
  std::int32_t parent = -1;   // -1 for the root
  Vertex vertex = 0;
  double birth = 0.0;
  std::int8_t direction = -1; // edge direction from parent; -1 for the root
  bool alive = false;         // filled in by mark_alive
};

struct BtpCaps {
  std::uint64_t max_particles = 10'000'000;
  std::uint64_t memory_budget = std::uint64_t{1} << 31;
};

struct BtpRun {
  int n = 0;
  double horizon = 0.0;
  Vertex origin = 0;
  std::uint64_t seed = 0;
  bool truncated = false;        // true only for cap-aborted partial logs
  bool birth_collision = false;  // some birth needed nextafter de-duplication
  bool alive_marked = false;
  std::vector<Particle> particles;                    // strictly birth-ordered
  std::vector<std::vector<std::uint32_t>> by_vertex;  // ids per vertex, birth-ordered
};

// Cap overflow carries the partial log so callers can report how far the
// run got.
struct BtpCapExceeded : CapExceeded {
  BtpCapExceeded(const std::string& msg, std::shared_ptr<BtpRun> partial_run)
      : CapExceeded(msg), partial(std::move(partial_run)) {}
  std::shared_ptr<BtpRun> partial;
};

namespace detail {

struct BtpEvent {
  double time;
  std::uint32_t parent;
  std::int8_t direction;
};
struct BtpEventLater {
  bool operator()(const BtpEvent& a, const BtpEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.parent != b.parent) return a.parent > b.parent;
    return a.direction > b.direction;
  }
};

inline std::uint64_t double_bits(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace detail

inline BtpRun simulate_btp(Dim dim, double horizon, std::uint64_t seed,
                           Vertex origin = 0, BtpCaps caps = {}) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ConfigError("simulate_btp: horizon must be positive and finite");
  if (origin >= dim.vertex_count())
    throw ConfigError("simulate_btp: origin out of range");
  std::uint64_t table_bytes = std::uint64_t(dim.vertex_count()) *
                              sizeof(std::vector<std::uint32_t>);
  if (table_bytes > caps.memory_budget)
    throw CapExceeded("simulate_btp: per-vertex tables need " +
                      std::to_string(table_bytes) + " bytes (budget " +
                      std::to_string(caps.memory_budget) + ")");

  auto run = std::make_shared<BtpRun>();
  run->n = dim.n();
  run->horizon = horizon;
  run->origin = origin;
  run->seed = seed;
  run->by_vertex.resize(dim.vertex_count());

  CounterRng rng(prf64(seed, kStreamBtp));
  std::priority_queue<detail::BtpEvent, std::vector<detail::BtpEvent>,
                      detail::BtpEventLater>
      events;
  std::unordered_set<std::uint64_t> birth_times;
  birth_times.reserve(1024);

  auto add_particle = [&](std::int32_t parent, Vertex vertex, double t,
                          std::int8_t dir) {
    Particle p;
    p.id = std::uint32_t(run->particles.size());
    p.parent = parent;
    p.vertex = vertex;
    p.birth = t;
    p.direction = dir;
    run->particles.push_back(p);
    run->by_vertex[vertex].push_back(p.id);
    birth_times.insert(detail::double_bits(t));
    return p.id;
  };

  add_particle(-1, origin, 0.0, -1);
  for (int d = 0; d < dim.n(); ++d) {
    double t = rng.exp1();
    if (t <= horizon) events.push({t, 0, std::int8_t(d)});
  }

  while (!events.empty()) {
    detail::BtpEvent ev = events.top();
    events.pop();
    double t = ev.time;
    bool bumped = false;
    while (birth_times.count(detail::double_bits(t))) {
      t = std::nextafter(t, std::numeric_limits<double>::infinity());
      run->birth_collision = true;
      bumped = true;
    }
    if (t > horizon) continue;  // collision bump pushed it past the horizon
    if (bumped && !events.empty() && t > events.top().time) {
      // keep the global birth order intact: requeue at the bumped time
      events.push({t, ev.parent, ev.direction});
      continue;
    }
    if (run->particles.size() >= caps.max_particles) {
      run->truncated = true;
      throw BtpCapExceeded(
          "simulate_btp: particle cap " + std::to_string(caps.max_particles) +
              " reached at time " + std::to_string(t) + " (horizon " +
              std::to_string(horizon) + ")",
          run);
    }
    Vertex child_vertex = flip(run->particles[ev.parent].vertex, ev.direction);
    std::uint32_t child = add_particle(std::int32_t(ev.parent), child_vertex,
                                       t, ev.direction);
    // next birth on the same (parent, direction) stream
    double nxt = t + rng.exp1();
    if (nxt <= horizon) events.push({nxt, ev.parent, ev.direction});
    // the child's own streams
    for (int d = 0; d < dim.n(); ++d) {
      double ct = t + rng.exp1();
      if (ct <= horizon) events.push({ct, child, std::int8_t(d)});
    }
  }
  return std::move(*run);
}

// Alive = the embedded growth model: scan in birth order; a particle is
// alive iff its parent is alive and it is the first alive-eligible arrival
// at its vertex.  The root is alive.
inline void mark_alive(BtpRun& run) {
  if (run.particles.empty()) throw ConfigError("mark_alive: empty run");
  std::vector<std::uint8_t> occupied(run.by_vertex.size(), 0);
  run.particles[0].alive = true;
  occupied[run.particles[0].vertex] = 1;
  for (std::size_t i = 1; i < run.particles.size(); ++i) {
    Particle& p = run.particles[i];
    p.alive = run.particles[p.parent].alive && !occupied[p.vertex];
    if (p.alive) occupied[p.vertex] = 1;
  }
  run.alive_marked = true;
}

struct ContestCounts {
  std::int64_t a = 0;  // earlier cohabitant is an ancestor of the particle
  std::int64_t b = 0;  // earlier cohabitant is unrelated
  std::int64_t c = 0;  // all earlier cohabitants along the ancestral line
};

// Reusable stamp buffer for ancestor marking across many queries.
struct ContestScratch {
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;
};

inline ContestCounts contest_counts(const BtpRun& run, std::uint32_t id,
                                    ContestScratch* scratch = nullptr) {
  if (id >= run.particles.size())
    throw ConfigError("contest_counts: particle id out of range");
  ContestScratch local;
  ContestScratch& sc = scratch ? *scratch : local;
  if (sc.stamp.size() != run.particles.size()) {
    sc.stamp.assign(run.particles.size(), 0);
    sc.epoch = 0;
  }
  ++sc.epoch;
  for (std::int32_t p = std::int32_t(id); p != -1; p = run.particles[p].parent)
    sc.stamp[p] = sc.epoch;

  ContestCounts cc;
  for (std::int32_t y = std::int32_t(id); y != -1;
       y = run.particles[y].parent) {
    const Particle& py = run.particles[y];
    const auto& cohab = run.by_vertex[py.vertex];
    // position of y among the births at this vertex (they are sorted)
    auto it = std::lower_bound(
        cohab.begin(), cohab.end(), py.birth,
        [&](std::uint32_t pid, double b) { return run.particles[pid].birth < b; });
    std::size_t pos = std::size_t(it - cohab.begin());
    cc.c += std::int64_t(pos);  // independent total, no a/b split involved
    for (std::size_t q = 0; q < pos; ++q) {
      if (sc.stamp[cohab[q]] == sc.epoch)
        cc.a += 1;
      else
        cc.b += 1;
    }
  }
  return cc;
}

// Number of contest-free particles at vertex v born by time t (0 or 1; a
// later arrival is always contested by the earlier one).
inline int uncontested_occupancy(const BtpRun& run, Vertex v, double t,
                                 ContestScratch* scratch = nullptr) {
  if (v >= run.by_vertex.size())
    throw ConfigError("uncontested_occupancy: vertex out of range");
  int count = 0;
  for (std::uint32_t id : run.by_vertex[v]) {
    if (run.particles[id].birth > t) break;  // list is birth-sorted
    if (contest_counts(run, id, scratch).c == 0) count += 1;
  }
  return count;
}

struct TripleCounts {
  std::int64_t t_a = 0;
  std::int64_t t_b = 0;
  std::int64_t occupancy = 0;  // particles at (v, <= t)
};

// Totals of a(x) and b(x) over all particles at vertex v born by time t;
// these are the expected-count integrands behind a_expected/b_expected.
inline TripleCounts count_triples(const BtpRun& run, Vertex v, double t,
                                  ContestScratch* scratch = nullptr) {
  if (v >= run.by_vertex.size())
    throw ConfigError("count_triples: vertex out of range");
  TripleCounts tc;
  for (std::uint32_t id : run.by_vertex[v]) {
    if (run.particles[id].birth > t) break;
    ContestCounts cc = contest_counts(run, id, scratch);
    if (cc.a + cc.b != cc.c)
      throw Error("count_triples: contest counter split disagrees with total");
    tc.t_a += cc.a;
    tc.t_b += cc.b;
    tc.occupancy += 1;
  }
  return tc;
}

struct AncestralPath {
  std::vector<Vertex> vertices;  // root first
  int length = 0;                // edges
  bool simple = false;           // no repeated vertex
};

inline AncestralPath ancestral_path(const BtpRun& run, std::uint32_t id) {
  if (id >= run.particles.size())
    throw ConfigError("ancestral_path: particle id out of range");
  AncestralPath ap;
  for (std::int32_t p = std::int32_t(id); p != -1; p = run.particles[p].parent)
    ap.vertices.push_back(run.particles[p].vertex);
  std::reverse(ap.vertices.begin(), ap.vertices.end());
  ap.length = int(ap.vertices.size()) - 1;
  std::vector<Vertex> sorted = ap.vertices;
  std::sort(sorted.begin(), sorted.end());
  ap.simple = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  return ap;
}

// ---- plain-text dump: header, then one `id parent vertex birth direction
// alive` line per particle.  %.17g round-trips doubles exactly.

inline void dump_run(const BtpRun& run, std::ostream& os) {
  char buf[64];
  auto fmt = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  os << "btp-run 1\n";
  os << "n " << run.n << "\n";
  os << "horizon " << fmt(run.horizon) << "\n";
  os << "seed " << run.seed << "\n";
  os << "origin " << run.origin << "\n";
  os << "truncated " << int(run.truncated) << "\n";
  os << "collision " << int(run.birth_collision) << "\n";
  os << "alive_marked " << int(run.alive_marked) << "\n";
  os << "particles " << run.particles.size() << "\n";
  for (const Particle& p : run.particles)
    os << p.id << ' ' << p.parent << ' ' << p.vertex << ' ' << fmt(p.birth)
       << ' ' << int(p.direction) << ' ' << int(p.alive) << "\n";
}

inline BtpRun load_run(std::istream& is) {
  BtpRun run;
  std::string tag;
  int version = 0;
  is >> tag >> version;
  if (tag != "btp-run" || version != 1)
    throw ConfigError("load_run: unrecognized dump header");
  std::size_t count = 0;
  int truncated = 0, collision = 0, alive_marked = 0;
  auto expect = [&](const char* key) {
    is >> tag;
    if (tag != key)
      throw ConfigError(std::string("load_run: expected '") + key +
                        "', got '" + tag + "'");
  };
  expect("n");
  is >> run.n;
  expect("horizon");
  is >> run.horizon;
  expect("seed");
  is >> run.seed;
  expect("origin");
  is >> run.origin;
  expect("truncated");
  is >> truncated;
  expect("collision");
  is >> collision;
  expect("alive_marked");
  is >> alive_marked;
  expect("particles");
  is >> count;
  if (!is) throw ConfigError("load_run: malformed header");
  if (run.n < 1 || run.n > kMaxDim)
    throw ConfigError("load_run: dimension out of range");
  run.truncated = truncated != 0;
  run.birth_collision = collision != 0;
  run.alive_marked = alive_marked != 0;
  run.by_vertex.resize(std::size_t{1} << run.n);
  run.particles.reserve(count);
  double prev_birth = -1.0;
  for (std::size_t i = 0; i < count; ++i) {
    Particle p;
    std::int64_t id, parent, vertex;
    int dir, alive;
    is >> id >> parent >> vertex >> p.birth >> dir >> alive;
    if (!is) throw ConfigError("load_run: truncated particle table");
    if (id != std::int64_t(i) || parent >= id || vertex < 0 ||
        vertex >= std::int64_t(run.by_vertex.size()))
      throw ConfigError("load_run: inconsistent particle record");
    if (p.birth <= prev_birth && i > 0)
      throw ConfigError("load_run: births are not strictly increasing");
    prev_birth = p.birth;
    p.id = std::uint32_t(id);
    p.parent = std::int32_t(parent);
    p.vertex = Vertex(vertex);
    p.direction = std::int8_t(dir);
    p.alive = alive != 0;
    run.particles.push_back(p);
    run.by_vertex[p.vertex].push_back(p.id);
  }
  return run;
}

}  // namespace cubefpp
