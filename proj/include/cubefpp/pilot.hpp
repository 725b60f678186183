#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "cubefpp/common.hpp"
#include "cubefpp/experiments.hpp"
#include "cubefpp/io.hpp"
#include "cubefpp/stats.hpp"

#include <json.hpp>

// Calibration protocol for the finite-n statistics that only have asymptotic
// targets: a one-off pilot run measures them, the bands are written to a
// committed JSON file, and later runs test membership against the frozen
// bands.  Bands are value +- max(6 standard errors, 5% relative), wide enough
// that an independent re-measurement at the same trial count sits inside with
// large margin, tight enough to pin the constant.

namespace cubefpp {

struct PilotBand {
  double value = 0.0;
  double std_error = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline PilotBand make_band(double value, double std_error) {
  PilotBand b;
  b.value = value;
  b.std_error = std_error;
  double half = std::max(6.0 * std_error, 0.05 * std::abs(value));
  b.lo = value - half;
  b.hi = value + half;
  return b;
}

struct Calibration {
  int schema_version = kSchemaVersion;
  std::string artifact_version = kArtifactVersion;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::vector<int> ns;                   // calibrated dimensions
  std::map<int, PilotBand> l1_times_n;   // n * E|T_n - theta|
  std::map<int, PilotBand> var_times_n2; // n^2 * Var T_n
  PilotBand l1_times_n_all;              // constant band across all ns
  PilotBand var_times_n2_all;
  double t_minus_times_n_hi = 0.0;       // upper bound for n * E max(theta-T,0)
  PilotBand length_over_n;               // geodesic length / n at ns.back()

  nlohmann::ordered_json to_json() const;
  static Calibration from_json(const nlohmann::json& j);
};

namespace pilot_detail {

inline nlohmann::ordered_json band_json(const PilotBand& b) {
  nlohmann::ordered_json j;
  j["value"] = b.value;
  j["std_error"] = b.std_error;
  j["lo"] = b.lo;
  j["hi"] = b.hi;
  return j;
}

inline PilotBand band_from_json(const nlohmann::json& j) {
  PilotBand b;
  b.value = j.at("value").get<double>();
  b.std_error = j.at("std_error").get<double>();
  b.lo = j.at("lo").get<double>();
  b.hi = j.at("hi").get<double>();
  if (!(b.lo <= b.value && b.value <= b.hi))
    throw ConfigError("calibration: band does not contain its value");
  return b;
}

// standard error of the sample variance via the fourth central moment
inline double variance_std_error(const std::vector<double>& xs) {
  std::size_t m = xs.size();
  if (m < 4) throw ConfigError("variance_std_error: need >= 4 samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(m);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= double(m);
  m4 /= double(m);
  double v = std::max(m4 - m2 * m2, 0.0);
  return std::sqrt(v / double(m));
}

}  // namespace pilot_detail

inline nlohmann::ordered_json Calibration::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["artifact_version"] = artifact_version;
  j["command"] = "pilot";
  j["seed"] = seed;
  j["trials"] = trials;
  j["ns"] = ns;
  nlohmann::ordered_json l1j, varj;
  for (const auto& [n, b] : l1_times_n)
    l1j[std::to_string(n)] = pilot_detail::band_json(b);
  for (const auto& [n, b] : var_times_n2)
    varj[std::to_string(n)] = pilot_detail::band_json(b);
  j["l1_times_n"] = l1j;
  j["var_times_n2"] = varj;
  j["l1_times_n_all"] = pilot_detail::band_json(l1_times_n_all);
  j["var_times_n2_all"] = pilot_detail::band_json(var_times_n2_all);
  j["t_minus_times_n_hi"] = t_minus_times_n_hi;
  j["length_over_n"] = pilot_detail::band_json(length_over_n);
  return j;
}

inline Calibration Calibration::from_json(const nlohmann::json& j) {
  Calibration c;
  c.schema_version = j.at("schema_version").get<int>();
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("calibration: unsupported schema_version " +
                      std::to_string(c.schema_version));
  c.artifact_version = j.at("artifact_version").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.trials = j.at("trials").get<std::uint64_t>();
  c.ns = j.at("ns").get<std::vector<int>>();
  for (int n : c.ns) {
    c.l1_times_n[n] =
        pilot_detail::band_from_json(j.at("l1_times_n").at(std::to_string(n)));
    c.var_times_n2[n] = pilot_detail::band_from_json(
        j.at("var_times_n2").at(std::to_string(n)));
  }
  c.l1_times_n_all = pilot_detail::band_from_json(j.at("l1_times_n_all"));
  c.var_times_n2_all = pilot_detail::band_from_json(j.at("var_times_n2_all"));
  c.t_minus_times_n_hi = j.at("t_minus_times_n_hi").get<double>();
  c.length_over_n = pilot_detail::band_from_json(j.at("length_over_n"));
  return c;
}

inline Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("calibration: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return Calibration::from_json(j);
}

// Measures the bands.  The geodesic band is taken at the largest n (the
// asymptotic target lives there); the L1 and variance bands are per-n plus
// one constant band covering all of them.
inline Calibration run_pilot(std::uint64_t seed, std::uint64_t trials,
                             int threads, std::vector<int> ns = {8, 12, 16}) {
  if (ns.empty()) throw ConfigError("run_pilot: need at least one n");
  Calibration cal;
  cal.seed = seed;
  cal.trials = trials;
  cal.ns = ns;
  const double th = theta();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    int n = ns[i];
    ExperimentConfig cfg;
    cfg.n = n;
    cfg.trials = trials;
    cfg.seed = prf64(seed, kStreamPilot + i);
    cfg.threads = threads;
    cfg.covering = false;
    FppBatch batch = run_fpp(cfg);

    std::vector<double> abs_dev(batch.t_first.size());
    std::vector<double> neg_dev(batch.t_first.size());
    for (std::size_t t = 0; t < batch.t_first.size(); ++t) {
      abs_dev[t] = std::abs(batch.t_first[t] - th);
      neg_dev[t] = std::max(th - batch.t_first[t], 0.0);
    }
    MetricSummary l1 = summarize("abs_dev", abs_dev);
    MetricSummary raw = summarize("t_first", batch.t_first);
    MetricSummary neg = summarize("neg_dev", neg_dev);

    double nn = double(n);
    cal.l1_times_n[n] = make_band(nn * l1.mean, nn * l1.std_error);
    double var_se = pilot_detail::variance_std_error(batch.t_first);
    cal.var_times_n2[n] = make_band(nn * nn * raw.variance, nn * nn * var_se);
    double neg_hi = nn * (neg.mean + std::max(6.0 * neg.std_error,
                                              0.05 * neg.mean));
    cal.t_minus_times_n_hi = std::max(cal.t_minus_times_n_hi, neg_hi);

    if (i + 1 == ns.size()) {
      MetricSummary len = summarize("length_over_n", batch.length_over_n);
      cal.length_over_n = make_band(len.mean, len.std_error);
    }
  }
  auto combine = [](const std::map<int, PilotBand>& per_n) {
    PilotBand all;
    bool first = true;
    for (const auto& [n, b] : per_n) {
      if (first) {
        all = b;
        first = false;
      } else {
        all.lo = std::min(all.lo, b.lo);
        all.hi = std::max(all.hi, b.hi);
        all.value = 0.5 * (all.lo + all.hi);
        all.std_error = std::max(all.std_error, b.std_error);
      }
    }
    return all;
  };
  cal.l1_times_n_all = combine(cal.l1_times_n);
  cal.var_times_n2_all = combine(cal.var_times_n2);
  return cal;
}

inline void write_calibration(const Calibration& cal, const std::string& path) {
  std::string text = cal.to_json().dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << text;
}

}  // namespace cubefpp
