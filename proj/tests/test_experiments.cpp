#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cubefpp/experiments.hpp"
#include "cubefpp/io.hpp"
#include "cubefpp/pilot.hpp"

using namespace cubefpp;

TEST_CASE("config validates and round-trips", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 7;
  cfg.trials = 55;
  cfg.seed = 1234;
  cfg.u = 0.9;
  cfg.covering = true;
  cfg.threads = 2;
  cfg.format = "json";
  cfg.out = "somewhere.json";
  auto j = cfg.to_json();
  ExperimentConfig back = ExperimentConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.n == 7);
  CHECK(back.u == 0.9);
  CHECK(back.out == "somewhere.json");

  ExperimentConfig bad = cfg;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.format = "xml";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.p_orders = {3};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.threads = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("unset horizon resolves to theta", "[experiments]") {
  ExperimentConfig cfg;
  CHECK(cfg.resolved_u() == theta());
  CHECK(cfg.resolved_horizon() == theta());
  cfg.u = 0.5;
  cfg.horizon = 0.25;
  CHECK(cfg.resolved_u() == 0.5);
  CHECK(cfg.resolved_horizon() == 0.25);
}

TEST_CASE("parallel trial loop covers every slot once", "[experiments]") {
  std::vector<int> hits(1000, 0);
  parallel_for_trials(1000, 8, [&](std::size_t, std::uint64_t t) {
    hits[t] += 1;
  });
  for (int h : hits) CHECK(h == 1);
  // exceptions propagate
  CHECK_THROWS_AS(parallel_for_trials(
                      100, 4,
                      [&](std::size_t, std::uint64_t t) {
                        if (t == 57) throw ConfigError("boom");
                      }),
                  ConfigError);
}

TEST_CASE("fpp batches are reproducible and thread-invariant", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.trials = 128;
  cfg.seed = 7;
  cfg.threads = 1;
  FppBatch b1 = run_fpp(cfg);
  ExperimentConfig cfg4 = cfg;
  cfg4.threads = 4;
  FppBatch b4 = run_fpp(cfg4);
  CHECK(b1.t_first == b4.t_first);
  CHECK(b1.length == b4.length);
  std::string out1 = render_output(fpp_doc(cfg, b1), "csv");
  std::string out4 = render_output(fpp_doc(cfg4, b4), "csv");
  CHECK(out1 == out4);
  std::string j1 = render_output(fpp_doc(cfg, b1), "json");
  std::string j4 = render_output(fpp_doc(cfg4, b4), "json");
  CHECK(j1 == j4);
}

TEST_CASE("fpp doc carries the deviation statistics", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 5;
  cfg.trials = 300;
  cfg.seed = 3;
  FppBatch b = run_fpp(cfg);
  OutputDoc doc = fpp_doc(cfg, b);
  CHECK(doc.command == "fpp");
  CHECK(doc.rows.size() == 300);
  double l1 = 0, l2 = 0;
  bool saw_l1 = false, saw_l2 = false;
  for (const auto& [name, cell] : doc.results) {
    if (name == "l1_deviation") {
      l1 = std::stod(cell.csv());
      saw_l1 = true;
    }
    if (name == "l2_deviation") {
      l2 = std::stod(cell.csv());
      saw_l2 = true;
    }
  }
  REQUIRE(saw_l1);
  REQUIRE(saw_l2);
  CHECK(l1 <= l2 * (1 + 1e-12));
  CHECK(l1 > 0.0);
}

TEST_CASE("csv layout has config header, trials, summaries, results",
          "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.trials = 10;
  cfg.seed = 9;
  OutputDoc doc = fpp_doc(cfg, run_fpp(cfg));
  std::string csv = render_csv(doc);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# schema_version,1");
  std::getline(in, line);
  CHECK(line.rfind("# artifact_version,", 0) == 0);
  std::getline(in, line);
  CHECK(line == "# command,fpp");
  std::getline(in, line);
  CHECK(line == "# seed,9");
  std::getline(in, line);
  CHECK(line.rfind("# config,", 0) == 0);
  std::getline(in, line);
  CHECK(line == "trial,seed,t_first,length,backsteps,covering_time");
  int trial_rows = 0;
  while (std::getline(in, line) && !line.empty() && line[0] != 'm')
    ++trial_rows;
  CHECK(trial_rows == 10);
  CHECK(line == "metric,count,mean,variance,stderr,min,max,q05,q50,q95");
}

TEST_CASE("json layout mirrors the csv content", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.trials = 6;
  cfg.seed = 2;
  OutputDoc doc = fpp_doc(cfg, run_fpp(cfg));
  auto j = nlohmann::json::parse(render_json(doc));
  CHECK(j["schema_version"] == 1);
  CHECK(j["artifact_version"] == kArtifactVersion);
  CHECK(j["config"]["command"] == "fpp");
  CHECK(j["config"]["n"] == 4);
  CHECK(j["seed"] == 2);
  CHECK(j["columns"].size() == 6);
  CHECK(j["rows"].size() == 6);
  CHECK(j["summary"].is_array());
  CHECK(j["results"].is_object());
  // config echo excludes execution-resource knobs
  CHECK_FALSE(j["config"].contains("threads"));
  CHECK_FALSE(j["config"].contains("out"));
}

TEST_CASE("write_output produces the exact rendered bytes", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.trials = 4;
  OutputDoc doc = fpp_doc(cfg, run_fpp(cfg));
  std::string path = "test_write_output.tmp.csv";
  write_output(doc, path, "csv");
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == render_csv(doc));
  std::remove(path.c_str());
}

TEST_CASE("btp batch aggregates match per-run recomputation", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 2;
  cfg.trials = 50;
  cfg.seed = 5;
  BtpBatch b = run_btp(cfg);
  Dim d(2);
  for (std::uint64_t t = 0; t < 50; ++t) {
    BtpRun run = simulate_btp(d, cfg.resolved_horizon(),
                              trial_seed(cfg.seed, t, kStreamBtp));
    CHECK(b.particles[t] == double(run.particles.size()));
    TripleCounts tc = count_triples(run, d.one(), cfg.resolved_horizon());
    CHECK(b.t_a[t] == double(tc.t_a));
    CHECK(b.t_b[t] == double(tc.t_b));
    CHECK(b.count_one[t] == double(tc.occupancy));
  }
  OutputDoc doc = btp_doc(cfg, b);
  bool saw_z = false;
  for (const auto& [name, cell] : doc.results)
    if (name == "z_count_one") {
      saw_z = true;
      CHECK(std::isfinite(std::stod(cell.csv())));
    }
  CHECK(saw_z);
}

TEST_CASE("walk batch histogram counts every coordinate", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 5;
  cfg.trials = 200;
  cfg.seed = 8;
  cfg.threads = 3;
  WalkBatch b = run_walks(cfg);
  std::int64_t total = 0;
  for (std::int64_t c : b.count_histogram) total += c;
  CHECK(total == 5 * 200);  // one histogram entry per coordinate per trial
  for (std::size_t k = 0; k < b.count_histogram.size(); ++k)
    if (k % 2 == 0 && k < 63) CHECK(b.count_histogram[k] == 0);  // even counts impossible
  for (double len : b.length) CHECK(len >= 5);
  OutputDoc doc = walk_doc(cfg, b);
  CHECK(doc.rows.size() == 200);
}

TEST_CASE("analytic doc lists constants and expectations", "[experiments]") {
  ExperimentConfig cfg;
  cfg.n = 3;
  OutputDoc doc = analytic_doc(cfg);
  CHECK(doc.command == "analytic");
  bool saw_theta = false, saw_a = false, saw_p = false;
  for (const auto& row : doc.rows) {
    std::string name = row[0].csv();
    if (name == "theta") {
      saw_theta = true;
      CHECK(std::stod(row[1].csv()) == Catch::Approx(theta()));
    }
    if (name == "a_expected") saw_a = true;
    if (name == "success_lower_bound") saw_p = true;
  }
  CHECK(saw_theta);
  CHECK(saw_a);
  CHECK(saw_p);
}

TEST_CASE("pilot calibration round-trips through json", "[experiments]") {
  Calibration cal = run_pilot(123, 400, 2, {4, 5});
  CHECK(cal.ns == std::vector<int>{4, 5});
  CHECK(cal.l1_times_n.at(4).lo < cal.l1_times_n.at(4).hi);
  CHECK(cal.l1_times_n_all.lo <= cal.l1_times_n.at(4).lo);
  CHECK(cal.var_times_n2_all.hi >= cal.var_times_n2.at(5).hi);
  CHECK(cal.t_minus_times_n_hi > 0.0);
  auto j = cal.to_json();
  Calibration back = Calibration::from_json(j);
  CHECK(back.to_json() == j);
  // bands hold for a fresh run at a different seed (same trial count)
  ExperimentConfig cfg;
  cfg.n = 5;
  cfg.trials = 400;
  cfg.seed = 777;
  FppBatch fresh = run_fpp(cfg);
  DeviationSummary dev = deviation_summary(fresh.t_first, theta());
  double stat = dev.l1 * 5;
  CHECK(stat >= cal.l1_times_n.at(5).lo);
  CHECK(stat <= cal.l1_times_n.at(5).hi);
}
