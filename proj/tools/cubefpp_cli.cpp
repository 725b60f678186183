// Command-line front end: analytic evaluation, Monte Carlo batches for the
// three simulation models, the invariant suite, and band calibration.
// Exit codes: 0 ok, 1 failure (invariants, caps on partial results treated
// as 3), 2 usage/config error, 3 resource cap.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cubefpp/cubefpp.hpp"

namespace {

using namespace cubefpp;

struct CommonArgs {
  ExperimentConfig cfg;
  std::string config_path;
};

void add_common(CLI::App* sub, CommonArgs& args, bool wants_trials = true) {
  sub->add_option("--config", args.config_path,
                  "JSON config file; flags override its values");
  sub->add_option("--n", args.cfg.n, "cube dimension");
  if (wants_trials)
    sub->add_option("--trials", args.cfg.trials, "number of Monte Carlo trials");
  sub->add_option("--seed", args.cfg.seed, "master seed");
  sub->add_option("--out", args.cfg.out, "output path (default stdout)");
  sub->add_option("--format", args.cfg.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--threads", args.cfg.threads, "worker threads");
}

// Flags override config-file values: parse once to find --config, load it as
// the new baseline, then let CLI11 re-apply the flags on top.
void merge_config_file(CommonArgs& args) {
  if (args.config_path.empty()) return;
  std::ifstream in(args.config_path);
  if (!in) throw ConfigError("cannot open config file: " + args.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  ExperimentConfig base = ExperimentConfig::from_json(j);
  // keep any flag that was explicitly given; CLI11 already wrote those into
  // args.cfg, so copy file values only where the flag is still at default
  ExperimentConfig defaults;
  auto pick = [](auto flag_value, auto default_value, auto file_value) {
    return flag_value != default_value ? flag_value : file_value;
  };
  ExperimentConfig merged = base;
  merged.n = pick(args.cfg.n, defaults.n, base.n);
  merged.trials = pick(args.cfg.trials, defaults.trials, base.trials);
  merged.seed = pick(args.cfg.seed, defaults.seed, base.seed);
  merged.u = pick(args.cfg.u, defaults.u, base.u);
  merged.horizon = pick(args.cfg.horizon, defaults.horizon, base.horizon);
  merged.tol = pick(args.cfg.tol, defaults.tol, base.tol);
  merged.max_subdivisions = pick(args.cfg.max_subdivisions,
                                 defaults.max_subdivisions, base.max_subdivisions);
  merged.covering = args.cfg.covering ? true : base.covering;
  merged.max_particles =
      pick(args.cfg.max_particles, defaults.max_particles, base.max_particles);
  merged.p_orders = args.cfg.p_orders != defaults.p_orders ? args.cfg.p_orders
                                                           : base.p_orders;
  merged.threads = pick(args.cfg.threads, defaults.threads, base.threads);
  merged.format = pick(args.cfg.format, defaults.format, base.format);
  merged.out = pick(args.cfg.out, defaults.out, base.out);
  args.cfg = merged;
}

int run_analytic(CommonArgs& args) {
  merge_config_file(args);
  args.cfg.validate();
  OutputDoc doc = analytic_doc(args.cfg);
  write_output(doc, args.cfg.out, args.cfg.format);
  return 0;
}

int run_fpp_cmd(CommonArgs& args) {
  merge_config_file(args);
  args.cfg.validate();
  FppBatch batch = run_fpp(args.cfg);
  write_output(fpp_doc(args.cfg, batch), args.cfg.out, args.cfg.format);
  return 0;
}

int run_btp_cmd(CommonArgs& args, const std::string& dump_path) {
  merge_config_file(args);
  args.cfg.validate();
  if (!dump_path.empty()) {
    // single run, full particle log
    Dim d(args.cfg.n);
    BtpRun run = simulate_btp(d, args.cfg.resolved_horizon(),
                              trial_seed(args.cfg.seed, 0, kStreamBtp), 0,
                              BtpCaps{args.cfg.max_particles});
    mark_alive(run);
    if (dump_path == "-") {
      dump_run(run, std::cout);
    } else {
      std::ofstream out(dump_path, std::ios::binary);
      if (!out) throw Error("cannot open output file: " + dump_path);
      dump_run(run, out);
    }
    return 0;
  }
  BtpBatch batch = run_btp(args.cfg);
  write_output(btp_doc(args.cfg, batch), args.cfg.out, args.cfg.format);
  return 0;
}

int run_walk_cmd(CommonArgs& args) {
  merge_config_file(args);
  args.cfg.validate();
  WalkBatch batch = run_walks(args.cfg);
  write_output(walk_doc(args.cfg, batch), args.cfg.out, args.cfg.format);
  return 0;
}

int run_verify_cmd(CommonArgs& args, bool inject_corrupt, bool quick) {
  merge_config_file(args);
  VerifyOptions vo;
  vo.seed = args.cfg.seed;
  vo.inject_corrupt_weight = inject_corrupt;
  if (quick) {
    vo.oracle_seeds = 20;
    vo.btp_runs = 60;
    vo.walk_trials = 1500;
    vo.triangle_n = 5;
  }
  std::vector<CheckResult> results = run_verification(vo);
  int failures = 0;
  for (const CheckResult& r : results) {
    std::printf("%-4s %-42s %s\n", r.pass ? "ok" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}

int run_pilot_cmd(CommonArgs& args) {
  merge_config_file(args);
  args.cfg.validate();
  Calibration cal = run_pilot(args.cfg.seed, args.cfg.trials, args.cfg.threads);
  write_calibration(cal, args.cfg.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-passage percolation on the n-cube: analytic values, "
               "Monte Carlo batches, invariant checks"};
  app.require_subcommand(1);

  CommonArgs analytic_args;
  analytic_args.cfg.n = 10000;
  auto* analytic_sub = app.add_subcommand(
      "analytic", "closed-form constants and expected contest counts");
  add_common(analytic_sub, analytic_args, false);
  analytic_sub->add_option("--u", analytic_args.cfg.u,
                           "time horizon (default: computed theta)");
  analytic_sub->add_option("--tol", analytic_args.cfg.tol,
                           "quadrature relative tolerance");

  CommonArgs fpp_args;
  auto* fpp_sub =
      app.add_subcommand("fpp", "first-passage Monte Carlo (Dijkstra trials)");
  add_common(fpp_sub, fpp_args);
  fpp_sub->add_flag("--covering", fpp_args.cfg.covering,
                    "also compute covering time (full relaxation)");
  fpp_sub->add_option("--p", fpp_args.cfg.p_orders,
                      "deviation norm orders (1 and/or 2)")
      ->delimiter(',');

  CommonArgs btp_args;
  std::string btp_dump;
  auto* btp_sub = app.add_subcommand(
      "btp", "branching translation process with alive/ghost coupling");
  add_common(btp_sub, btp_args);
  btp_sub->add_option("--horizon", btp_args.cfg.horizon,
                      "simulation horizon (default: computed theta)");
  btp_sub->add_option("--max-particles", btp_args.cfg.max_particles,
                      "particle cap per run");
  btp_sub->add_option("--dump", btp_dump,
                      "write one full particle log to PATH ('-' for stdout)");

  CommonArgs walk_args;
  auto* walk_sub = app.add_subcommand(
      "walk", "conditioned walks: odd Poisson flips per coordinate");
  add_common(walk_sub, walk_args);
  walk_sub->add_option("--u", walk_args.cfg.u,
                       "walk duration (default: computed theta)");

  CommonArgs verify_args;
  bool inject_corrupt = false;
  bool quick = false;
  auto* verify_sub =
      app.add_subcommand("verify", "run the full invariant suite");
  add_common(verify_sub, verify_args, false);
  verify_sub->add_flag("--inject-corrupt-weight", inject_corrupt,
                       "negative control: corrupt one weight, expect failure");
  verify_sub->add_flag("--quick", quick, "reduced trial counts");

  CommonArgs pilot_args;
  pilot_args.cfg.trials = 10000;
  auto* pilot_sub = app.add_subcommand(
      "pilot", "measure calibration bands and emit the calibration JSON");
  add_common(pilot_sub, pilot_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (analytic_sub->parsed()) return run_analytic(analytic_args);
    if (fpp_sub->parsed()) return run_fpp_cmd(fpp_args);
    if (btp_sub->parsed()) return run_btp_cmd(btp_args, btp_dump);
    if (walk_sub->parsed()) return run_walk_cmd(walk_args);
    if (verify_sub->parsed())
      return run_verify_cmd(verify_args, inject_corrupt, quick);
    if (pilot_sub->parsed()) return run_pilot_cmd(pilot_args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CapExceeded& e) {
    std::fprintf(stderr, "cap exceeded: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
