#pragma once

// Deterministic report serialization. CSV cells use 17 significant digits so
// parsed values round-trip exactly; JSON documents keep insertion order and
// map non-finite numbers to the strings "nan"/"inf"/"-inf".

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "allpay/analysis.hpp"
#include "allpay/model.hpp"
#include "allpay/qre.hpp"
#include "allpay/race.hpp"

namespace allpay {

using ordered_json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline ordered_json json_number(double v) {
  if (!std::isfinite(v)) return format_double(v);
  return v;
}

inline ordered_json json_array(const std::vector<double>& values) {
  ordered_json arr = ordered_json::array();
  for (double v : values) arr.push_back(json_number(v));
  return arr;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

inline void write_json_file(const std::filesystem::path& path, const ordered_json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

// Row-oriented CSV with a fixed header; all cells are preformatted strings.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) : columns_(header.size()) {
    append_row(header);
  }

  void add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row width mismatch");
    append_row(cells);
  }

  const std::string& str() const { return body_; }

 private:
  void append_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }

  std::size_t columns_;
  std::string body_;
};

inline std::string join_semicolon(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

inline ordered_json to_json(const ConditionSummary& s) {
  ordered_json j;
  j["holds"] = s.holds;
  j["fails"] = s.fails;
  j["undefined"] = s.undefined;
  j["hypothesis_not_met"] = s.hypothesis_not_met;
  j["defined"] = s.defined;
  j["fraction_holding"] = json_number(s.fraction_holding);
  j["worst_margin"] = json_number(s.worst_margin);
  return j;
}

inline ordered_json to_json(const ConditionReport& r, int max_listed_failures = 32) {
  ordered_json j;
  j["id"] = r.condition_id;
  j["grid"] = r.grid_description;
  j["points"] = static_cast<long long>(r.points.size());
  j["summary"] = to_json(r.summary);
  ordered_json failures = ordered_json::array();
  int listed = 0;
  for (const PointVerdict& p : r.points) {
    if (p.verdict != Verdict::fails) continue;
    if (listed++ >= max_listed_failures) break;
    ordered_json f;
    f["coords"] = json_array(p.coords);
    f["i"] = p.miner_i;
    if (p.miner_j >= 0) f["j"] = p.miner_j;
    f["lhs"] = json_number(p.lhs);
    f["rhs"] = json_number(p.rhs);
    f["margin"] = json_number(p.margin);
    failures.push_back(std::move(f));
  }
  j["failing_points"] = std::move(failures);
  return j;
}

// Per-point rows; extra columns vary by condition but are constant within one
// report, so the header is taken from the first point carrying extras.
inline std::string condition_points_csv(const ConditionReport& r) {
  std::vector<std::string> extra_names;
  for (const PointVerdict& p : r.points) {
    if (!p.extra.empty()) {
      for (const auto& kv : p.extra) extra_names.push_back(kv.first);
      break;
    }
  }
  std::vector<std::string> header = {"coords", "i", "j", "lhs", "rhs", "margin", "verdict"};
  header.insert(header.end(), extra_names.begin(), extra_names.end());
  CsvBuilder csv(header);
  for (const PointVerdict& p : r.points) {
    std::vector<std::string> row = {join_semicolon(p.coords),
                                    std::to_string(p.miner_i),
                                    std::to_string(p.miner_j),
                                    format_double(p.lhs),
                                    format_double(p.rhs),
                                    format_double(p.margin),
                                    to_string(p.verdict)};
    for (const std::string& name : extra_names) {
      double value = std::numeric_limits<double>::quiet_NaN();
      for (const auto& kv : p.extra) {
        if (kv.first == name) {
          value = kv.second;
          break;
        }
      }
      row.push_back(format_double(value));
    }
    csv.add_row(row);
  }
  return csv.str();
}

inline ordered_json to_json(const QuadraticFeasibility& q) {
  ordered_json j;
  j["prize"] = json_number(q.prize);
  j["horizon"] = q.horizon;
  j["miners"] = q.miners;
  j["c_tot"] = json_number(q.c_tot);
  j["c_min"] = json_number(q.c_min);
  j["b"] = json_number(q.b);
  j["d"] = json_number(q.d);
  j["discriminant"] = json_number(q.discriminant);
  j["margin"] = json_number(q.margin);
  if (q.roots) {
    j["roots"] = json_array({(*q.roots)[0], (*q.roots)[1]});
  } else {
    j["roots"] = nullptr;
  }
  if (q.feasible_interval) {
    j["feasible_interval"] = json_array({(*q.feasible_interval)[0], (*q.feasible_interval)[1]});
  } else {
    j["feasible_interval"] = nullptr;
  }
  j["verdict"] = q.infeasible_on_unit ? "infeasible-on-[0,1]" : "feasible-interval";
  j["completed_square_residual"] = json_number(q.completed_square_residual);
  j["sampling_agrees"] = q.sampling_agrees;
  return j;
}

inline ordered_json to_json(const ScanBox& b) {
  ordered_json j;
  j["prize"] = json_array({b.prize_lo, b.prize_hi});
  j["horizon"] = ordered_json::array({b.horizon_lo, b.horizon_hi});
  j["miners"] = ordered_json::array({b.miners_lo, b.miners_hi});
  j["cost"] = json_array({b.cost_lo, b.cost_hi});
  return j;
}

inline ordered_json to_json(const ScanReport& r) {
  ordered_json j;
  j["box"] = to_json(r.box);
  j["resolution"] = r.resolution;
  j["cells"] = r.total_cells;
  j["infeasible_cells"] = r.infeasible_cells;
  j["fraction_infeasible"] = json_number(r.fraction_infeasible);
  ordered_json feasible = ordered_json::array();
  for (std::size_t idx : r.feasible_indices) {
    const ScanCell& cell = r.cells[idx];
    ordered_json c;
    c["prize"] = json_number(cell.prize);
    c["horizon"] = cell.horizon;
    c["miners"] = cell.miners;
    c["c_min"] = json_number(cell.c_min);
    c["c_tot"] = json_number(cell.c_tot);
    c["feasible_interval"] =
        json_array({(*cell.feas.feasible_interval)[0], (*cell.feas.feasible_interval)[1]});
    c["margin"] = json_number(cell.feas.margin);
    feasible.push_back(std::move(c));
  }
  j["feasible_cells"] = std::move(feasible);
  return j;
}

inline std::string scan_margin_csv(const ScanReport& r) {
  CsvBuilder csv({"prize", "horizon", "miners", "c_min", "c_tot", "b", "d", "margin", "verdict"});
  for (const ScanCell& cell : r.cells) {
    csv.add_row({format_double(cell.prize), std::to_string(cell.horizon), std::to_string(cell.miners),
                 format_double(cell.c_min), format_double(cell.c_tot), format_double(cell.feas.b),
                 format_double(cell.feas.d), format_double(cell.feas.margin),
                 cell.feas.infeasible_on_unit ? "infeasible-on-[0,1]" : "feasible-interval"});
  }
  return csv.str();
}

}  // namespace allpay
