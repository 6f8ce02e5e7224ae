#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lds/core/error.hpp"
#include "lds/harness/ablate.hpp"
#include "lds/harness/evaluate.hpp"

namespace lds::csv {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

using Row = std::vector<std::string>;

inline void write_rows(const std::string& path, const std::vector<Row>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write CSV '" + path + "'");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << escape(row[i]);
    }
    out << "\r\n";
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

/// Quoted fields may contain commas, doubled quotes and line breaks. Accepts
/// LF or CRLF record ends.
inline std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
      row.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw DataError("CSV: unterminated quoted field");
  if (field_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<Row> read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

/// One row per episode: run, episode, accuracy. Wall-clock time is left out
/// so seeded reruns produce identical files.
inline void export_metrics(const std::vector<Metrics>& runs, const std::string& path) {
  std::vector<Row> rows{{"run", "episode", "accuracy"}};
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t e = 0; e < runs[r].accuracies.size(); ++e) {
      rows.push_back({std::to_string(r), std::to_string(e), format_double(runs[r].accuracies[e])});
    }
  }
  write_rows(path, rows);
}

inline void export_metrics(const Metrics& m, const std::string& path) { export_metrics(std::vector{m}, path); }

inline void export_ablation(const std::vector<AblationRow>& report, const std::string& path) {
  std::vector<Row> rows{{"loss", "scaler", "metalearner", "episodes", "mean", "std"}};
  for (const auto& r : report) {
    rows.push_back({std::string(to_string(r.loss)), r.scaler ? "em" : "none", std::string(to_string(r.metalearner)),
                    std::to_string(r.metrics.count), format_double(r.metrics.mean), format_double(r.metrics.std)});
  }
  write_rows(path, rows);
}

}  // namespace lds::csv
