#pragma once

// Scenario files: one JSON document with named sections (miners, auction,
// allocation, solver, simulation, analysis, output). Parsing is strict —
// unknown keys anywhere are rejected, and every numeric field is validated
// against its target type's invariants with a dotted field-path diagnostic.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "allpay/analysis.hpp"
#include "allpay/errors.hpp"
#include "allpay/model.hpp"
#include "allpay/race.hpp"

namespace allpay {

struct Scenario {
  // miners
  int miner_count = 0;
  std::optional<std::vector<double>> costs;

  // auction
  double prize = 0.0;
  int horizon = 1;
  double mu = 1.0;

  std::optional<AllocationSpec> allocation;

  // solver
  bool has_solver = false;
  int grid_points = 129;
  std::optional<double> c_max;
  std::string spacing = "uniform";
  double damping = 0.5;
  double tol = 1e-8;
  int max_iter = 10000;
  std::optional<std::uint64_t> solver_seed;

  // simulation
  bool has_simulation = false;
  long long trials = 0;
  std::optional<std::uint64_t> sim_seed;
  RaceSemantics semantics = RaceSemantics::exact_at_k;

  // analysis
  bool has_analysis = false;
  std::vector<std::string> conditions;
  std::optional<CostBox> cost_box;
  ScanBox scan_box;
  int scan_resolution = 8;

  // output
  std::string output_format = "json";
  std::optional<std::string> destination;

  AuctionParams params() const { return AuctionParams(prize, horizon, mu); }

  const AllocationSpec& alloc() const {
    if (!allocation) throw ScenarioError("allocation", "section required");
    return *allocation;
  }

  CostProfile cost_profile() const {
    if (!costs) throw ScenarioError("miners.costs", "required for this command");
    return CostProfile(*costs);
  }
};

namespace scenario_detail {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& field, const std::string& message) {
  throw ScenarioError(field, message);
}

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<document>" : path_, "must be an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.push_back(key);
    return &j_.at(key);
  }

  const json& require(const std::string& key) {
    const json* v = take(key);
    if (!v) fail(field(key), "required key missing");
    return *v;
  }

  double require_double(const std::string& key) { return as_double(require(key), field(key)); }

  std::optional<double> optional_double(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    return as_double(*v, field(key));
  }

  long long require_int(const std::string& key) { return as_int(require(key), field(key)); }

  std::optional<long long> optional_int(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    return as_int(*v, field(key));
  }

  std::optional<std::uint64_t> optional_seed(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v->get<long long>());
    }
    fail(field(key), "must be a nonnegative integer");
  }

  std::string require_string(const std::string& key) { return as_string(require(key), field(key)); }

  std::optional<std::string> optional_string(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    return as_string(*v, field(key));
  }

  std::vector<double> require_double_array(const std::string& key) {
    return as_double_array(require(key), field(key));
  }

  std::optional<std::vector<double>> optional_double_array(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    return as_double_array(*v, field(key));
  }

  std::vector<std::string> require_string_array(const std::string& key) {
    const json& v = require(key);
    if (!v.is_array()) fail(field(key), "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(field(key), "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  // [lo, hi] pair
  std::optional<std::pair<double, double>> optional_range(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->size() != 2) fail(field(key), "must be a [lo, hi] pair");
    return std::make_pair(as_double((*v)[0], field(key)), as_double((*v)[1], field(key)));
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end()) {
        fail(field(item.key()), "unknown key");
      }
    }
  }

 private:
  static double as_double(const json& v, const std::string& f) {
    if (!v.is_number()) fail(f, "must be a number");
    return v.get<double>();
  }

  static long long as_int(const json& v, const std::string& f) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(f, "must be an integer");
    return v.get<long long>();
  }

  static std::string as_string(const json& v, const std::string& f) {
    if (!v.is_string()) fail(f, "must be a string");
    return v.get<std::string>();
  }

  static std::vector<double> as_double_array(const json& v, const std::string& f) {
    if (!v.is_array()) fail(f, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(f, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline const std::vector<std::string>& known_conditions() {
  static const std::vector<std::string> ids = {"prop1",    "lemma1", "lemma2",
                                               "logderiv", "quad",   "pi-derivative"};
  return ids;
}

inline void parse_miners(const json& j, Scenario& s) {
  ObjectReader r(j, "miners");
  const long long count = r.require_int("count");
  if (count < 2) fail("miners.count", "must be at least 2");
  s.miner_count = static_cast<int>(count);
  if (const auto costs = r.optional_double_array("costs")) {
    if (static_cast<long long>(costs->size()) != count) {
      fail("miners.costs", "length must equal miners.count");
    }
    try {
      CostProfile probe(*costs);
    } catch (const std::invalid_argument& e) {
      fail("miners.costs", e.what());
    }
    s.costs = *costs;
  }
  r.finish();
}

inline void parse_auction(const json& j, Scenario& s) {
  ObjectReader r(j, "auction");
  s.prize = r.require_double("prize");
  if (!std::isfinite(s.prize) || s.prize < 0.0) fail("auction.prize", "must be finite and nonnegative");
  const long long horizon = r.require_int("horizon");
  if (horizon < 1) fail("auction.horizon", "must be at least 1");
  s.horizon = static_cast<int>(horizon);
  s.mu = r.require_double("mu");
  if (!std::isfinite(s.mu) || s.mu <= 0.0) fail("auction.mu", "must be finite and positive");
  r.finish();
}

inline void parse_allocation(const json& j, Scenario& s) {
  ObjectReader r(j, "allocation");
  const std::string family = r.require_string("family");
  try {
    if (family == "constant") {
      s.allocation = AllocationSpec::constant(r.require_double("level"));
    } else if (family == "saturating-linear") {
      s.allocation = AllocationSpec::saturating_linear(r.require_double("beta"));
    } else if (family == "inverse-total") {
      s.allocation = AllocationSpec::inverse_total(r.require_double("alpha"));
    } else if (family == "tabulated") {
      s.allocation =
          AllocationSpec::tabulated(r.require_double_array("knots"), r.require_double_array("values"));
    } else {
      fail("allocation.family", "unknown family '" + family + "'");
    }
  } catch (const std::invalid_argument& e) {
    fail("allocation", e.what());
  }
  r.finish();
}

inline void parse_solver(const json& j, Scenario& s) {
  ObjectReader r(j, "solver");
  s.has_solver = true;
  if (const auto gp = r.optional_int("grid_points")) {
    if (*gp < 16) fail("solver.grid_points", "must be at least 16");
    s.grid_points = static_cast<int>(*gp);
  }
  if (const auto cm = r.optional_double("c_max")) {
    if (!std::isfinite(*cm) || *cm <= 0.0) fail("solver.c_max", "must be finite and positive");
    s.c_max = *cm;
  }
  if (const auto sp = r.optional_string("spacing")) {
    if (*sp != "uniform" && *sp != "log") fail("solver.spacing", "must be 'uniform' or 'log'");
    s.spacing = *sp;
  }
  if (const auto a = r.optional_double("damping")) {
    if (!(*a > 0.0) || *a > 1.0) fail("solver.damping", "must lie in (0, 1]");
    s.damping = *a;
  }
  if (const auto t = r.optional_double("tol")) {
    if (!(*t > 0.0)) fail("solver.tol", "must be positive");
    s.tol = *t;
  }
  if (const auto m = r.optional_int("max_iter")) {
    if (*m < 1) fail("solver.max_iter", "must be at least 1");
    s.max_iter = static_cast<int>(*m);
  }
  s.solver_seed = r.optional_seed("seed");
  r.finish();
}

inline void parse_simulation(const json& j, Scenario& s) {
  ObjectReader r(j, "simulation");
  s.has_simulation = true;
  s.trials = r.require_int("trials");
  if (s.trials < 1) fail("simulation.trials", "must be at least 1");
  s.sim_seed = r.optional_seed("seed");
  if (const auto sem = r.optional_string("semantics")) {
    try {
      s.semantics = race_semantics_from_string(*sem);
    } catch (const std::invalid_argument& e) {
      fail("simulation.semantics", e.what());
    }
  }
  r.finish();
}

inline void parse_analysis(const json& j, Scenario& s) {
  ObjectReader r(j, "analysis");
  s.has_analysis = true;
  if (r.has("conditions")) {
    s.conditions = r.require_string_array("conditions");
    if (s.conditions.empty()) fail("analysis.conditions", "must not be empty");
    for (const std::string& id : s.conditions) {
      const auto& known = known_conditions();
      if (std::find(known.begin(), known.end(), id) == known.end()) {
        fail("analysis.conditions", "unknown condition id '" + id + "'");
      }
    }
  }
  if (const json* cb = r.take("cost_box")) {
    ObjectReader cr(*cb, "analysis.cost_box");
    CostBox box;
    const long long miners = cr.require_int("miners");
    if (miners < 2) fail("analysis.cost_box.miners", "must be at least 2");
    box.miners = static_cast<int>(miners);
    box.lo = cr.require_double("lo");
    box.hi = cr.require_double("hi");
    if (!std::isfinite(box.lo) || !std::isfinite(box.hi) || box.lo < 0.0 || box.hi <= box.lo) {
      fail("analysis.cost_box", "bounds must satisfy 0 <= lo < hi");
    }
    const long long pts = cr.require_int("points_per_dim");
    if (pts < 2) fail("analysis.cost_box.points_per_dim", "must be at least 2");
    box.points_per_dim = static_cast<int>(pts);
    cr.finish();
    s.cost_box = box;
  }
  if (const json* sb = r.take("scan_box")) {
    ObjectReader sr(*sb, "analysis.scan_box");
    if (const auto range = sr.optional_range("prize")) {
      if (!(range->first > 0.0) || range->second < range->first) {
        fail("analysis.scan_box.prize", "must satisfy 0 < lo <= hi");
      }
      s.scan_box.prize_lo = range->first;
      s.scan_box.prize_hi = range->second;
    }
    if (const auto range = sr.optional_range("horizon")) {
      if (range->first < 1 || range->second < range->first) {
        fail("analysis.scan_box.horizon", "must satisfy 1 <= lo <= hi");
      }
      s.scan_box.horizon_lo = static_cast<int>(range->first);
      s.scan_box.horizon_hi = static_cast<int>(range->second);
    }
    if (const auto range = sr.optional_range("miners")) {
      if (range->first < 2 || range->second < range->first) {
        fail("analysis.scan_box.miners", "must satisfy 2 <= lo <= hi");
      }
      s.scan_box.miners_lo = static_cast<int>(range->first);
      s.scan_box.miners_hi = static_cast<int>(range->second);
    }
    if (const auto range = sr.optional_range("cost")) {
      if (!(range->first > 0.0) || range->second < range->first) {
        fail("analysis.scan_box.cost", "must satisfy 0 < lo <= hi");
      }
      s.scan_box.cost_lo = range->first;
      s.scan_box.cost_hi = range->second;
    }
    sr.finish();
  }
  if (const auto res = r.optional_int("scan_resolution")) {
    if (*res < 1) fail("analysis.scan_resolution", "must be at least 1");
    s.scan_resolution = static_cast<int>(*res);
  }
  r.finish();
}

inline void parse_output(const json& j, Scenario& s) {
  ObjectReader r(j, "output");
  if (const auto fmt = r.optional_string("format")) {
    if (*fmt != "json") fail("output.format", "only 'json' is supported");
    s.output_format = *fmt;
  }
  s.destination = r.optional_string("destination");
  r.finish();
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const nlohmann::json& doc) {
  using scenario_detail::ObjectReader;
  Scenario s;
  ObjectReader top(doc, "");
  scenario_detail::parse_miners(top.require("miners"), s);
  scenario_detail::parse_auction(top.require("auction"), s);
  scenario_detail::parse_allocation(top.require("allocation"), s);
  if (const auto* solver = top.take("solver")) scenario_detail::parse_solver(*solver, s);
  if (const auto* sim = top.take("simulation")) scenario_detail::parse_simulation(*sim, s);
  if (const auto* an = top.take("analysis")) scenario_detail::parse_analysis(*an, s);
  if (const auto* out = top.take("output")) scenario_detail::parse_output(*out, s);
  top.finish();
  return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

}  // namespace allpay
