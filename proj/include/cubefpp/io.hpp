#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cubefpp/common.hpp"
#include "cubefpp/stats.hpp"

// Rendering of experiment outputs.  Both formats are built from the same
// document so they carry the same facts; all floats go through either
// %.17g (CSV) or nlohmann's shortest-round-trip dtoa (JSON), both of which
// are deterministic and lossless.

namespace cubefpp {

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

class Cell {
 public:
  static Cell u64(std::uint64_t v) { return Cell(Kind::U64, double(0), v, 0, {}); }
  static Cell i64(std::int64_t v) { return Cell(Kind::I64, double(0), 0, v, {}); }
  static Cell f64(double v) { return Cell(Kind::F64, v, 0, 0, {}); }
  static Cell str(std::string v) {
    return Cell(Kind::STR, 0, 0, 0, std::move(v));
  }

  std::string csv() const {
    switch (kind_) {
      case Kind::U64: return std::to_string(u_);
      case Kind::I64: return std::to_string(i_);
      case Kind::F64: return format_double(f_);
      case Kind::STR: return s_;
    }
    return {};
  }
  nlohmann::ordered_json json() const {
    switch (kind_) {
      case Kind::U64: return u_;
      case Kind::I64: return i_;
      case Kind::F64: return f_;
      case Kind::STR: return s_;
    }
    return {};
  }

 private:
  enum class Kind { U64, I64, F64, STR };
  Cell(Kind k, double f, std::uint64_t u, std::int64_t i, std::string s)
      : kind_(k), f_(f), u_(u), i_(i), s_(std::move(s)) {}
  Kind kind_;
  double f_;
  std::uint64_t u_;
  std::int64_t i_;
  std::string s_;
};

struct OutputDoc {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;  // experiment identity (resolved defaults)
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<MetricSummary> summaries;
  std::vector<std::pair<std::string, Cell>> results;
};

inline std::vector<Cell> summary_cells(const MetricSummary& s) {
  return {Cell::str(s.name),     Cell::u64(s.count),  Cell::f64(s.mean),
          Cell::f64(s.variance), Cell::f64(s.std_error), Cell::f64(s.min),
          Cell::f64(s.max),      Cell::f64(s.q05),    Cell::f64(s.q50),
          Cell::f64(s.q95)};
}

inline std::string render_csv(const OutputDoc& doc) {
  std::string out;
  out += "# schema_version," + std::to_string(kSchemaVersion) + "\n";
  out += "# artifact_version,";
  out += kArtifactVersion;
  out += "\n";
  out += "# command," + doc.command + "\n";
  out += "# seed," + std::to_string(doc.seed) + "\n";
  out += "# config," + doc.config.dump() + "\n";
  if (!doc.columns.empty()) {
    for (std::size_t i = 0; i < doc.columns.size(); ++i)
      out += (i ? "," : "") + doc.columns[i];
    out += "\n";
    for (const auto& row : doc.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out += (i ? "," : "") + row[i].csv();
      out += "\n";
    }
  }
  if (!doc.summaries.empty()) {
    out += "metric,count,mean,variance,stderr,min,max,q05,q50,q95\n";
    for (const auto& s : doc.summaries) {
      auto cells = summary_cells(s);
      for (std::size_t i = 0; i < cells.size(); ++i)
        out += (i ? "," : "") + cells[i].csv();
      out += "\n";
    }
  }
  if (!doc.results.empty()) {
    out += "result,value\n";
    for (const auto& [name, cell] : doc.results)
      out += name + "," + cell.csv() + "\n";
  }
  return out;
}

inline std::string render_json(const OutputDoc& doc) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["artifact_version"] = kArtifactVersion;
  j["command"] = doc.command;
  j["seed"] = doc.seed;
  j["config"] = doc.config;
  if (!doc.columns.empty()) {
    j["columns"] = doc.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : doc.rows) {
      nlohmann::ordered_json r = nlohmann::ordered_json::array();
      for (const auto& cell : row) r.push_back(cell.json());
      rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
  }
  if (!doc.summaries.empty()) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : doc.summaries) {
      nlohmann::ordered_json e;
      e["metric"] = s.name;
      e["count"] = s.count;
      e["mean"] = s.mean;
      e["variance"] = s.variance;
      e["stderr"] = s.std_error;
      e["min"] = s.min;
      e["max"] = s.max;
      e["q05"] = s.q05;
      e["q50"] = s.q50;
      e["q95"] = s.q95;
      arr.push_back(std::move(e));
    }
    j["summary"] = std::move(arr);
  }
  if (!doc.results.empty()) {
    nlohmann::ordered_json res;
    for (const auto& [name, cell] : doc.results) res[name] = cell.json();
    j["results"] = std::move(res);
  }
  return j.dump(2) + "\n";
}

inline std::string render_output(const OutputDoc& doc,
                                 const std::string& format) {
  if (format == "csv") return render_csv(doc);
  if (format == "json") return render_json(doc);
  throw ConfigError("unknown output format '" + format + "' (csv|json)");
}

inline void write_output(const OutputDoc& doc, const std::string& path,
                         const std::string& format) {
  std::string body = render_output(doc, format);
  if (path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open output file: " + path);
  os << body;
  if (!os) throw Error("failed writing output file: " + path);
}

}  // namespace cubefpp
