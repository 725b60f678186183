#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cubefpp/analytic.hpp"
#include "cubefpp/btp.hpp"
#include "cubefpp/common.hpp"
#include "cubefpp/fpp.hpp"
#include "cubefpp/hypercube.hpp"
#include "cubefpp/io.hpp"
#include "cubefpp/rng.hpp"
#include "cubefpp/stats.hpp"
#include "cubefpp/walks.hpp"

// Trial-loop drivers.  Each trial is a pure function of (master seed, trial
// index), and results land in trial-indexed slots, so the outputs cannot
// depend on scheduling: any thread count produces identical bytes.

namespace cubefpp {

struct ExperimentConfig {
  int n = 8;
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  double u = 0.0;        // 0 resolves to theta
  double horizon = 0.0;  // 0 resolves to theta
  double tol = 1e-8;
  int max_subdivisions = 4096;
  bool covering = false;
  std::uint64_t max_particles = 10'000'000;
  std::vector<int> p_orders = {1, 2};
  int threads = 1;
  std::string format = "csv";
  std::string out;

  double resolved_u() const { return u > 0.0 ? u : theta(); }
  double resolved_horizon() const { return horizon > 0.0 ? horizon : theta(); }

  void validate() const {
    if (n < 1) throw ConfigError("config: n must be >= 1");
    if (trials < 1) throw ConfigError("config: trials must be >= 1");
    if (u < 0.0 || u > 100.0) throw ConfigError("config: u out of range");
    if (horizon < 0.0 || horizon > 100.0)
      throw ConfigError("config: horizon out of range");
    if (!(tol > 0.0) || tol > 1e-6)
      throw ConfigError("config: tol must be in (0, 1e-6]");
    if (max_subdivisions < 32)
      throw ConfigError("config: max_subdivisions must be >= 32");
    if (max_particles < 1)
      throw ConfigError("config: max_particles must be >= 1");
    if (threads < 1 || threads > 256)
      throw ConfigError("config: threads must be in [1, 256]");
    if (format != "csv" && format != "json")
      throw ConfigError("config: format must be csv or json");
    if (p_orders.empty()) throw ConfigError("config: p_orders must not be empty");
    for (int p : p_orders)
      if (p != 1 && p != 2)
        throw ConfigError("config: p_orders entries must be 1 or 2");
  }

  AnalyticConfig analytic() const {
    AnalyticConfig a;
    a.n = n;
    a.tol = tol;
    a.max_subdivisions = max_subdivisions;
    return a;
  }

  // The experiment's identity: everything that determines the numbers.
  // Execution-resource knobs (threads, output path, format) are not part of
  // it, which is what makes outputs byte-identical across thread counts.
  nlohmann::ordered_json identity_json(const std::string& command) const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["n"] = n;
    j["trials"] = trials;
    j["seed"] = seed;
    j["u"] = resolved_u();
    j["horizon"] = resolved_horizon();
    j["tol"] = tol;
    j["max_subdivisions"] = max_subdivisions;
    j["covering"] = covering;
    j["max_particles"] = max_particles;
    j["p_orders"] = p_orders;
    return j;
  }

  // Full lossless round-trip, runtime knobs included (config-file form).
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = identity_json("");
    j.erase("command");
    j["threads"] = threads;
    j["format"] = format;
    j["out"] = out;
    j["u"] = u;  // keep the unresolved sentinel so defaults stay defaults
    j["horizon"] = horizon;
    return j;
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.n = j.value("n", c.n);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.u = j.value("u", c.u);
    c.horizon = j.value("horizon", c.horizon);
    c.tol = j.value("tol", c.tol);
    c.max_subdivisions = j.value("max_subdivisions", c.max_subdivisions);
    c.covering = j.value("covering", c.covering);
    c.max_particles = j.value("max_particles", c.max_particles);
    c.p_orders = j.value("p_orders", c.p_orders);
    c.threads = j.value("threads", c.threads);
    c.format = j.value("format", c.format);
    c.out = j.value("out", c.out);
    c.validate();
    return c;
  }
};

// Runs fn(worker, trial) for every trial index; work stealing over an
// atomic counter, results must go into trial-indexed slots.
template <class Fn>
void parallel_for_trials(std::uint64_t trials, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) fn(0, t);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        std::uint64_t t = next.fetch_add(1, std::memory_order_relaxed);
        if (t >= trials) return;
        try {
          fn(std::size_t(w), t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(trials, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---- first-passage batches -------------------------------------------------

struct FppBatch {
  std::vector<std::uint64_t> seeds;
  std::vector<double> t_first;
  std::vector<double> length;
  std::vector<double> backsteps;
  std::vector<double> covering;  // NaN when not requested
  std::vector<double> length_over_n;
};

inline FppBatch run_fpp(const ExperimentConfig& cfg) {
  cfg.validate();
  Dim dim(cfg.n);
  FppBatch batch;
  batch.seeds.resize(cfg.trials);
  batch.t_first.resize(cfg.trials);
  batch.length.resize(cfg.trials);
  batch.backsteps.resize(cfg.trials);
  batch.covering.resize(cfg.trials,
                        std::numeric_limits<double>::quiet_NaN());
  batch.length_over_n.resize(cfg.trials);
  int workers = cfg.threads;
  std::vector<FppWorkspace> ws(static_cast<std::size_t>(workers));
  parallel_for_trials(cfg.trials, workers, [&](std::size_t w, std::uint64_t t) {
    std::uint64_t ts = trial_seed(cfg.seed, t, kStreamFpp);
    std::uint64_t weight_key = prf64(ts, kStreamWeights);
    auto weight = [&](EdgeRef e) {
      return exp1_from_bits(prf64(weight_key, edge_index(e, dim)));
    };
    PassageOptions opt;
    opt.want_geodesic = true;
    opt.want_covering = cfg.covering;
    PassageResult r = first_passage(dim, weight, opt, &ws[w]);
    batch.seeds[t] = ts;
    batch.t_first[t] = r.t_first;
    batch.length[t] = r.geodesic_length;
    batch.backsteps[t] = r.backsteps;
    if (cfg.covering) batch.covering[t] = r.covering_time;
    batch.length_over_n[t] = double(r.geodesic_length) / cfg.n;
  });
  return batch;
}

inline OutputDoc fpp_doc(const ExperimentConfig& cfg, const FppBatch& batch) {
  OutputDoc doc;
  doc.command = "fpp";
  doc.seed = cfg.seed;
  doc.config = cfg.identity_json("fpp");
  doc.columns = {"trial", "seed",      "t_first",
                 "length", "backsteps", "covering_time"};
  doc.rows.reserve(batch.t_first.size());
  for (std::size_t t = 0; t < batch.t_first.size(); ++t)
    doc.rows.push_back({Cell::u64(t), Cell::u64(batch.seeds[t]),
                        Cell::f64(batch.t_first[t]),
                        Cell::i64(std::int64_t(batch.length[t])),
                        Cell::i64(std::int64_t(batch.backsteps[t])),
                        Cell::f64(batch.covering[t])});
  doc.summaries.push_back(summarize("t_first", batch.t_first));
  doc.summaries.push_back(summarize("length", batch.length));
  doc.summaries.push_back(summarize("backsteps", batch.backsteps));
  if (cfg.covering) doc.summaries.push_back(summarize("covering_time", batch.covering));
  doc.summaries.push_back(summarize("length_over_n", batch.length_over_n));

  double th = theta();
  DeviationSummary dev = deviation_summary(batch.t_first, th);
  const MetricSummary& tfs = doc.summaries[0];
  doc.results = {
      {"theta", Cell::f64(th)},
      {"mean_t_plus", Cell::f64(dev.mean_plus)},
      {"mean_t_minus", Cell::f64(dev.mean_minus)},
      {"p_below_theta", Cell::f64(dev.p_below)},
  };
  for (int p : cfg.p_orders)
    doc.results.push_back({p == 1 ? "l1_deviation" : "l2_deviation",
                           Cell::f64(p == 1 ? dev.l1 : dev.l2)});
  doc.results.push_back({"l1_times_n", Cell::f64(dev.l1 * cfg.n)});
  doc.results.push_back(
      {"var_times_n2", Cell::f64(tfs.variance * double(cfg.n) * cfg.n)});
  doc.results.push_back(
      {"t_minus_times_n", Cell::f64(dev.mean_minus * cfg.n)});
  return doc;
}

// ---- branching-process batches ----------------------------------------------

struct BtpBatch {
  std::vector<std::uint64_t> seeds;
  std::vector<double> particles;      // log size
  std::vector<double> count_one;      // occupancy of the all-ones corner
  std::vector<double> t_a;            // contest triples, ancestor kind
  std::vector<double> t_b;            // contest triples, unrelated kind
  std::vector<double> uncontested;    // 0/1 at the all-ones corner
  std::vector<double> alive_arrival;  // birth of the alive particle there (NaN if none)
};

inline BtpBatch run_btp(const ExperimentConfig& cfg) {
  cfg.validate();
  Dim dim(cfg.n);
  double horizon = cfg.resolved_horizon();
  BtpBatch batch;
  batch.seeds.resize(cfg.trials);
  batch.particles.resize(cfg.trials);
  batch.count_one.resize(cfg.trials);
  batch.t_a.resize(cfg.trials);
  batch.t_b.resize(cfg.trials);
  batch.uncontested.resize(cfg.trials);
  batch.alive_arrival.resize(cfg.trials);
  BtpCaps caps;
  caps.max_particles = cfg.max_particles;
  parallel_for_trials(cfg.trials, cfg.threads, [&](std::size_t, std::uint64_t t) {
    std::uint64_t ts = trial_seed(cfg.seed, t, kStreamBtp);
    BtpRun run = simulate_btp(dim, horizon, ts, 0, caps);
    mark_alive(run);
    Vertex one = dim.one();
    ContestScratch scratch;
    TripleCounts tc = count_triples(run, one, horizon, &scratch);
    batch.seeds[t] = ts;
    batch.particles[t] = double(run.particles.size());
    batch.count_one[t] = double(tc.occupancy);
    batch.t_a[t] = double(tc.t_a);
    batch.t_b[t] = double(tc.t_b);
    batch.uncontested[t] =
        double(uncontested_occupancy(run, one, horizon, &scratch));
    double arrival = std::numeric_limits<double>::quiet_NaN();
    for (std::uint32_t id : run.by_vertex[one])
      if (run.particles[id].alive) {
        arrival = run.particles[id].birth;
        break;
      }
    batch.alive_arrival[t] = arrival;
  });
  return batch;
}

inline OutputDoc btp_doc(const ExperimentConfig& cfg, const BtpBatch& batch) {
  OutputDoc doc;
  doc.command = "btp";
  doc.seed = cfg.seed;
  doc.config = cfg.identity_json("btp");
  doc.columns = {"trial", "seed",        "particles",  "count_one",
                 "t_a",   "t_b",         "uncontested", "alive_arrival"};
  for (std::size_t t = 0; t < batch.count_one.size(); ++t)
    doc.rows.push_back({Cell::u64(t), Cell::u64(batch.seeds[t]),
                        Cell::i64(std::int64_t(batch.particles[t])),
                        Cell::i64(std::int64_t(batch.count_one[t])),
                        Cell::i64(std::int64_t(batch.t_a[t])),
                        Cell::i64(std::int64_t(batch.t_b[t])),
                        Cell::i64(std::int64_t(batch.uncontested[t])),
                        Cell::f64(batch.alive_arrival[t])});
  doc.summaries.push_back(summarize("particles", batch.particles));
  doc.summaries.push_back(summarize("count_one", batch.count_one));
  doc.summaries.push_back(summarize("t_a", batch.t_a));
  doc.summaries.push_back(summarize("t_b", batch.t_b));
  doc.summaries.push_back(summarize("uncontested", batch.uncontested));

  double horizon = cfg.resolved_horizon();
  AnalyticConfig ac = cfg.analytic();
  double mean_expected = occupancy_mean(cfg.n, cfg.n, horizon);
  double pop_expected = std::exp(cfg.n * horizon);
  AnalyticValue a = a_expected(ac, horizon);
  AnalyticValue ab = ab_expected(ac, horizon);
  auto z_of = [&](const MetricSummary& s, double expected) {
    return s.std_error > 0 ? (s.mean - expected) / s.std_error
                           : std::numeric_limits<double>::quiet_NaN();
  };
  const auto& s_pop = doc.summaries[0];
  const auto& s_cnt = doc.summaries[1];
  const auto& s_ta = doc.summaries[2];
  const auto& s_tb = doc.summaries[3];
  MetricSummary s_tab = summarize("t_total", [&] {
    std::vector<double> tot(batch.t_a.size());
    for (std::size_t i = 0; i < tot.size(); ++i)
      tot[i] = batch.t_a[i] + batch.t_b[i];
    return tot;
  }());
  doc.results = {
      {"expected_count_one", Cell::f64(mean_expected)},
      {"z_count_one", Cell::f64(z_of(s_cnt, mean_expected))},
      {"expected_t_a", Cell::f64(a.value)},
      {"z_t_a", Cell::f64(z_of(s_ta, a.value))},
      {"expected_t_total", Cell::f64(ab.value)},
      {"z_t_total", Cell::f64(z_of(s_tab, ab.value))},
      {"expected_t_b", Cell::f64(ab.value - a.value)},
      {"z_t_b", Cell::f64(z_of(s_tb, ab.value - a.value))},
      {"expected_population", Cell::f64(pop_expected)},
      {"z_population", Cell::f64(z_of(s_pop, pop_expected))},
      {"uncontested_rate", Cell::f64(doc.summaries[4].mean)},
  };
  return doc;
}

// ---- conditioned-walk batches -----------------------------------------------

struct WalkBatch {
  std::vector<std::uint64_t> seeds;
  std::vector<double> length;
  std::vector<double> backsteps;
  std::vector<double> oriented;  // 1 when the walk never flips back
  std::vector<double> length_over_n;
  std::vector<std::int64_t> count_histogram;  // per-coordinate counts, index k
};

inline WalkBatch run_walks(const ExperimentConfig& cfg) {
  cfg.validate();
  double t_end = cfg.resolved_horizon();
  WalkBatch batch;
  batch.seeds.resize(cfg.trials);
  batch.length.resize(cfg.trials);
  batch.backsteps.resize(cfg.trials);
  batch.oriented.resize(cfg.trials);
  batch.length_over_n.resize(cfg.trials);
  const int kHistMax = 64;
  std::vector<std::vector<std::int64_t>> hist(
      std::size_t(cfg.threads), std::vector<std::int64_t>(kHistMax, 0));
  parallel_for_trials(cfg.trials, cfg.threads, [&](std::size_t w, std::uint64_t t) {
    std::uint64_t ts = trial_seed(cfg.seed, t, kStreamWalk);
    CounterRng rng(ts);
    WalkPath path = sample_conditioned_walk(cfg.n, t_end, rng);
    WalkStats st = walk_stats(path);
    batch.seeds[t] = ts;
    batch.length[t] = st.length;
    batch.backsteps[t] = st.backsteps;
    batch.oriented[t] = st.length == cfg.n ? 1.0 : 0.0;
    batch.length_over_n[t] = st.length_over_n;
    for (int c : st.per_coordinate)
      hist[w][std::size_t(std::min(c, kHistMax - 1))] += 1;
  });
  batch.count_histogram.assign(kHistMax, 0);
  for (const auto& h : hist)
    for (int k = 0; k < kHistMax; ++k) batch.count_histogram[k] += h[k];
  return batch;
}

inline OutputDoc walk_doc(const ExperimentConfig& cfg, const WalkBatch& batch) {
  OutputDoc doc;
  doc.command = "walk";
  doc.seed = cfg.seed;
  doc.config = cfg.identity_json("walk");
  doc.columns = {"trial", "seed", "length", "backsteps", "oriented"};
  for (std::size_t t = 0; t < batch.length.size(); ++t)
    doc.rows.push_back({Cell::u64(t), Cell::u64(batch.seeds[t]),
                        Cell::i64(std::int64_t(batch.length[t])),
                        Cell::i64(std::int64_t(batch.backsteps[t])),
                        Cell::i64(std::int64_t(batch.oriented[t]))});
  doc.summaries.push_back(summarize("length", batch.length));
  doc.summaries.push_back(summarize("backsteps", batch.backsteps));
  doc.summaries.push_back(summarize("length_over_n", batch.length_over_n));

  double t_end = cfg.resolved_horizon();
  double rate_mean = t_end / std::tanh(t_end);  // E[count] per coordinate
  double oriented_expected = oriented_mass_ratio(cfg.n, t_end);
  double oriented_rate = 0.0;
  for (double o : batch.oriented) oriented_rate += o;
  oriented_rate /= double(batch.oriented.size());
  doc.results = {
      {"expected_steps_per_coordinate", Cell::f64(rate_mean)},
      {"mean_length_over_n", Cell::f64(doc.summaries[2].mean)},
      {"se_length_over_n", Cell::f64(doc.summaries[2].std_error)},
      {"oriented_rate", Cell::f64(oriented_rate)},
      {"oriented_expected", Cell::f64(oriented_expected)},
  };
  return doc;
}

// ---- analytic table ----------------------------------------------------------

inline OutputDoc analytic_doc(const ExperimentConfig& cfg) {
  cfg.validate();
  AnalyticConfig ac = cfg.analytic();
  double u = cfg.resolved_u();
  OutputDoc doc;
  doc.command = "analytic";
  doc.seed = cfg.seed;
  doc.config = cfg.identity_json("analytic");
  doc.columns = {"metric", "value", "est_error"};
  auto row = [&](const std::string& name, double v, double e) {
    doc.rows.push_back({Cell::str(name), Cell::f64(v), Cell::f64(e)});
  };
  Constants c = constants();
  row("theta", c.theta, 0.0);
  row("a_limit", c.a_limit, 0.0);
  row("b_limit", c.b_limit, 0.0);
  row("ab_limit", c.ab_limit, 0.0);
  row("s_lower_limit", c.s_lower_limit, 0.0);
  row("p_lower_limit", c.p_lower_limit, 0.0);
  row("geodesic_slope", c.geodesic_slope, 0.0);
  row("occupancy_mean_one", occupancy_mean(cfg.n, cfg.n, u), 0.0);
  AnalyticValue a = a_expected(ac, u);
  row("a_expected", a.value, a.est_error);
  AnalyticValue ab = ab_expected(ac, u);
  row("ab_expected", ab.value, ab.est_error);
  AnalyticValue b = b_expected(ac, u);
  row("b_expected", b.value, b.est_error);
  SBounds sb = s_bounds(ac, u);
  row("s_lower", sb.lower, sb.est_error);
  row("s_upper", sb.upper, 0.0);
  try {
    AnalyticValue p = success_lower_bound(ac, u);
    row("success_lower_bound", p.value, p.est_error);
  } catch (const DegenerateBound&) {
    doc.rows.push_back({Cell::str("success_lower_bound"), Cell::str("degenerate"),
                        Cell::str("")});
  }
  row("oriented_mass_ratio", oriented_mass_ratio(cfg.n, u), 0.0);
  return doc;
}

}  // namespace cubefpp
