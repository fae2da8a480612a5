#pragma once

// Multi-area case description: types, validation, and the JSON case format.
//
//   {
//     "base_mva": 100,
//     "areas": [
//       { "id": 1,
//         "buses": [
//           { "id": 1, "kind": "internal", "gen": [0, 200], "wind": [15, 25],
//             "demand_min": [0, 0], "demand_max": [49, 51],
//             "price_gen": 20, "price_wind": 0, "price_demand": 100 },
//           { "id": 2, "kind": "boundary" } ],
//         "branches": [ { "from": 1, "to": 2, "reactance": 0.1, "capacity": 150 } ] } ],
//     "tielines": [ { "from": {"area": 1, "bus": 2}, "to": {"area": 2, "bus": 5},
//                     "reactance": 0.25, "capacity": 100 } ],
//     "slack": { "area": 1, "bus": 2 },
//     "options": { "epsilon": 1e-5, "big_m": "auto", ... }
//   }
//
// Powers are MW, reactances p.u. on base_mva, prices $/MWh. The ranges
// "wind", "demand_min" and "demand_max" are the uncertainty box [lo, hi] of
// the available wind, the demand floor and the demand ceiling; a scalar is
// accepted for a degenerate range.

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tieline/error.hpp"

namespace tieline {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

enum class BusKind { internal, boundary };

struct BusSpec {
  int id = 0;
  BusKind kind = BusKind::internal;
  // Internal buses only.
  Range gen;         // [G_min, G_max]
  Range wind;        // box of the available wind capacity
  Range demand_min;  // box of the demand floor
  Range demand_max;  // box of the demand ceiling
  double price_gen = 0.0;
  double price_wind = 0.0;
  double price_demand = 0.0;
  bool operator==(const BusSpec&) const = default;
};

struct BranchSpec {
  int from = 0;
  int to = 0;
  double reactance = 0.0;  // p.u.
  double capacity = 0.0;   // MW
  bool operator==(const BranchSpec&) const = default;
};

struct AreaSpec {
  int id = 0;
  std::vector<BusSpec> buses;
  std::vector<BranchSpec> branches;
  bool operator==(const AreaSpec&) const = default;

  const BusSpec* find_bus(int bus_id) const {
    for (const auto& b : buses)
      if (b.id == bus_id) return &b;
    return nullptr;
  }
};

struct BusRef {
  int area = 0;
  int bus = 0;
  bool operator==(const BusRef&) const = default;
  auto operator<=>(const BusRef&) const = default;
};

struct TieLineSpec {
  BusRef from;
  BusRef to;
  double reactance = 0.0;
  double capacity = 0.0;
  bool operator==(const TieLineSpec&) const = default;
};

struct BigM {
  bool automatic = true;
  double value = 1e5;  // used when !automatic
  bool operator==(const BigM&) const = default;
};

struct SolverOptions {
  double epsilon = 1e-5;    // probe step length, in radians of y
  double tol_opt = 1e-8;    // relative optimality tolerance
  double tol_feas = 1e-8;   // constraint tolerance on scaled rows
  double tol_v = 1e-7;      // normalized min-norm direction threshold
  BigM big_m;
  double big_m_fallback = 1e5;  // used when the automatic bound is unbounded
  int max_outer_iters = 20;     // scenario-generation iterations
  int max_iters = 500;          // region-exploration iterations per solve
  std::string lex_tiebreak = "lexicographic";
  std::uint64_t seed = 0;
  bool operator==(const SolverOptions&) const = default;
};

struct CaseSpec {
  double base_mva = 100.0;
  std::vector<AreaSpec> areas;
  std::vector<TieLineSpec> tielines;
  BusRef slack;
  SolverOptions options;
  bool operator==(const CaseSpec&) const = default;

  const AreaSpec* find_area(int area_id) const {
    for (const auto& a : areas)
      if (a.id == area_id) return &a;
    return nullptr;
  }
};

namespace detail {

using Json = nlohmann::ordered_json;

inline std::string where(const std::string& path) { return path.empty() ? "document" : path; }

inline void only_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InputError("type_error", where(path) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InputError("unknown_field", "unknown field '" + key + "' in " + where(path));
  }
}

inline const Json& need(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError("missing_field", "missing field '" + std::string(key) + "' in " + where(path));
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw InputError("type_error", path + " must be a number");
  return j.get<double>();
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError("type_error", path + " must be an integer");
  return j.get<int>();
}

inline Range range(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (!j.is_array() || j.size() != 2) throw InputError("type_error", path + " must be a number or [lo, hi]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline BusRef bus_ref(const Json& j, const std::string& path) {
  only_keys(j, path, {"area", "bus"});
  return {integer(need(j, "area", path), path + ".area"), integer(need(j, "bus", path), path + ".bus")};
}

inline std::string bus_name(int area, int bus) {
  return "area " + std::to_string(area) + " bus " + std::to_string(bus);
}

}  // namespace detail

// Checks every CaseSpec invariant; throws InputError naming the rule.
inline void validate(const CaseSpec& c) {
  using detail::bus_name;
  if (!(c.base_mva > 0)) throw InputError("nonpositive_base", "base_mva must be positive");
  if (c.areas.empty()) throw InputError("no_areas", "case declares no areas");
  std::set<int> area_ids;
  for (const auto& a : c.areas) {
    if (!area_ids.insert(a.id).second)
      throw InputError("duplicate_area_id", "area id " + std::to_string(a.id) + " declared twice");
    std::set<int> bus_ids;
    bool has_internal = false;
    for (const auto& b : a.buses) {
      if (!bus_ids.insert(b.id).second)
        throw InputError("duplicate_bus_id", bus_name(a.id, b.id) + " declared twice");
      if (b.kind == BusKind::boundary) {
        const BusSpec blank{.id = b.id, .kind = BusKind::boundary};
        if (!(b == blank))
          throw InputError("boundary_bus_has_assets", bus_name(a.id, b.id) + " is a boundary bus with assets");
        continue;
      }
      has_internal = true;
      if (b.gen.lo > b.gen.hi)
        throw InputError("gen_limits_inverted", "generation limits inverted at " + bus_name(a.id, b.id));
      for (const auto& [r, label] : {std::pair{b.wind, "wind"}, std::pair{b.demand_min, "demand_min"},
                                     std::pair{b.demand_max, "demand_max"}}) {
        if (r.lo > r.hi)
          throw InputError("xi_range_inverted",
                           std::string(label) + " range inverted (lo > hi) at " + bus_name(a.id, b.id));
        if (r.lo < 0)
          throw InputError("xi_negative", std::string(label) + " range negative at " + bus_name(a.id, b.id));
      }
      if (b.demand_min.hi > b.demand_max.lo)
        throw InputError("demand_limits_inverted",
                         "demand floor can exceed demand ceiling at " + bus_name(a.id, b.id));
    }
    if (!has_internal)
      throw InputError("area_without_internal_bus", "area " + std::to_string(a.id) + " has no internal bus");
    for (const auto& br : a.branches) {
      if (!a.find_bus(br.from) || !a.find_bus(br.to))
        throw InputError("branch_unknown_bus", "branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                                                   " in area " + std::to_string(a.id) + " references an unknown bus");
      if (br.from == br.to)
        throw InputError("branch_self_loop", "branch at " + bus_name(a.id, br.from) + " connects a bus to itself");
      if (!(br.reactance > 0))
        throw InputError("nonpositive_reactance", "branch reactance must be positive in area " + std::to_string(a.id));
      if (!(br.capacity > 0))
        throw InputError("nonpositive_capacity", "branch capacity must be positive in area " + std::to_string(a.id));
    }
  }
  auto endpoint = [&](const BusRef& r) {
    const AreaSpec* a = c.find_area(r.area);
    const BusSpec* b = a ? a->find_bus(r.bus) : nullptr;
    if (!b) throw InputError("tie_unknown_endpoint", "tie endpoint " + bus_name(r.area, r.bus) + " does not exist");
    if (b->kind != BusKind::boundary)
      throw InputError("tie_endpoint_not_boundary", "tie endpoint not boundary: " + bus_name(r.area, r.bus));
  };
  for (const auto& t : c.tielines) {
    endpoint(t.from);
    endpoint(t.to);
    if (t.from.area == t.to.area)
      throw InputError("tie_same_area", "tie-line joins two buses of area " + std::to_string(t.from.area));
    if (!(t.reactance > 0)) throw InputError("nonpositive_reactance", "tie-line reactance must be positive");
    if (t.capacity < 0) throw InputError("negative_capacity", "tie-line capacity must be nonnegative");
  }
  {
    const AreaSpec* a = c.find_area(c.slack.area);
    const BusSpec* b = a ? a->find_bus(c.slack.bus) : nullptr;
    if (!b) throw InputError("slack_unknown", "slack " + bus_name(c.slack.area, c.slack.bus) + " does not exist");
    if (b->kind != BusKind::boundary) throw InputError("slack_not_boundary", "slack bus must be a boundary bus");
    if (c.slack.area != c.areas.front().id)
      throw InputError("slack_not_first_area", "slack bus must belong to the first area");
  }
  const auto& o = c.options;
  for (const auto& [v, label] : {std::pair{o.epsilon, "epsilon"}, std::pair{o.tol_opt, "tol_opt"},
                                 std::pair{o.tol_feas, "tol_feas"}, std::pair{o.tol_v, "tol_v"},
                                 std::pair{o.big_m_fallback, "big_m_fallback"}}) {
    if (!(v > 0)) throw InputError("option_nonpositive", std::string("option ") + label + " must be positive");
  }
  if (!o.big_m.automatic && !(o.big_m.value > 0))
    throw InputError("option_nonpositive", "option big_m must be positive");
  if (o.max_iters <= 0 || o.max_outer_iters <= 0)
    throw InputError("option_nonpositive", "iteration caps must be positive");
  if (o.lex_tiebreak != "lexicographic")
    throw InputError("option_invalid", "lex_tiebreak only supports \"lexicographic\"");
}

inline SolverOptions parse_options(const nlohmann::ordered_json& j, const std::string& path = "options") {
  using namespace detail;
  only_keys(j, path,
            {"epsilon", "tol_opt", "tol_feas", "tol_v", "big_m", "big_m_fallback", "max_outer_iters", "max_iters",
             "lex_tiebreak", "seed"});
  SolverOptions o;
  if (j.contains("epsilon")) o.epsilon = number(j["epsilon"], path + ".epsilon");
  if (j.contains("tol_opt")) o.tol_opt = number(j["tol_opt"], path + ".tol_opt");
  if (j.contains("tol_feas")) o.tol_feas = number(j["tol_feas"], path + ".tol_feas");
  if (j.contains("tol_v")) o.tol_v = number(j["tol_v"], path + ".tol_v");
  if (j.contains("big_m")) {
    const auto& m = j["big_m"];
    if (m.is_string() && m.get<std::string>() == "auto") {
      o.big_m.automatic = true;
    } else if (m.is_number()) {
      o.big_m.automatic = false;
      o.big_m.value = m.get<double>();
    } else {
      throw InputError("type_error", path + ".big_m must be \"auto\" or a number");
    }
  }
  if (j.contains("big_m_fallback")) o.big_m_fallback = number(j["big_m_fallback"], path + ".big_m_fallback");
  if (j.contains("max_outer_iters")) o.max_outer_iters = integer(j["max_outer_iters"], path + ".max_outer_iters");
  if (j.contains("max_iters")) o.max_iters = integer(j["max_iters"], path + ".max_iters");
  if (j.contains("lex_tiebreak")) {
    if (!j["lex_tiebreak"].is_string()) throw InputError("type_error", path + ".lex_tiebreak must be a string");
    o.lex_tiebreak = j["lex_tiebreak"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw InputError("type_error", path + ".seed must be an integer");
    o.seed = j["seed"].get<std::uint64_t>();
  }
  return o;
}

inline CaseSpec case_from_json(const nlohmann::ordered_json& j) {
  using namespace detail;
  only_keys(j, "", {"base_mva", "areas", "tielines", "slack", "options"});
  CaseSpec c;
  if (j.contains("base_mva")) c.base_mva = number(j["base_mva"], "base_mva");
  const Json& areas = need(j, "areas", "");
  if (!areas.is_array()) throw InputError("type_error", "areas must be an array");
  for (std::size_t ai = 0; ai < areas.size(); ++ai) {
    const std::string ap = "areas[" + std::to_string(ai) + "]";
    const Json& ja = areas[ai];
    only_keys(ja, ap, {"id", "buses", "branches"});
    AreaSpec a;
    a.id = integer(need(ja, "id", ap), ap + ".id");
    const Json& buses = need(ja, "buses", ap);
    if (!buses.is_array()) throw InputError("type_error", ap + ".buses must be an array");
    for (std::size_t bi = 0; bi < buses.size(); ++bi) {
      const std::string bp = ap + ".buses[" + std::to_string(bi) + "]";
      const Json& jb = buses[bi];
      if (!jb.is_object()) throw InputError("type_error", bp + " must be an object");
      BusSpec b;
      b.id = integer(need(jb, "id", bp), bp + ".id");
      const Json& kind = need(jb, "kind", bp);
      if (kind == "boundary") {
        b.kind = BusKind::boundary;
        if (jb.size() != 2) throw InputError("boundary_bus_has_assets", bp + " is a boundary bus with assets");
        a.buses.push_back(b);
        continue;
      }
      if (kind != "internal") throw InputError("type_error", bp + ".kind must be \"internal\" or \"boundary\"");
      only_keys(jb, bp,
                {"id", "kind", "gen", "wind", "demand_min", "demand_max", "price_gen", "price_wind", "price_demand"});
      b.gen = range(need(jb, "gen", bp), bp + ".gen");
      b.wind = jb.contains("wind") ? range(jb["wind"], bp + ".wind") : Range{};
      b.demand_min = jb.contains("demand_min") ? range(jb["demand_min"], bp + ".demand_min") : Range{};
      b.demand_max = range(need(jb, "demand_max", bp), bp + ".demand_max");
      b.price_gen = number(need(jb, "price_gen", bp), bp + ".price_gen");
      b.price_wind = jb.contains("price_wind") ? number(jb["price_wind"], bp + ".price_wind") : 0.0;
      b.price_demand = number(need(jb, "price_demand", bp), bp + ".price_demand");
      a.buses.push_back(b);
    }
    if (ja.contains("branches")) {
      const Json& brs = ja["branches"];
      if (!brs.is_array()) throw InputError("type_error", ap + ".branches must be an array");
      for (std::size_t k = 0; k < brs.size(); ++k) {
        const std::string p = ap + ".branches[" + std::to_string(k) + "]";
        only_keys(brs[k], p, {"from", "to", "reactance", "capacity"});
        a.branches.push_back({integer(need(brs[k], "from", p), p + ".from"), integer(need(brs[k], "to", p), p + ".to"),
                              number(need(brs[k], "reactance", p), p + ".reactance"),
                              number(need(brs[k], "capacity", p), p + ".capacity")});
      }
    }
    c.areas.push_back(std::move(a));
  }
  if (j.contains("tielines")) {
    const Json& ties = j["tielines"];
    if (!ties.is_array()) throw InputError("type_error", "tielines must be an array");
    for (std::size_t k = 0; k < ties.size(); ++k) {
      const std::string p = "tielines[" + std::to_string(k) + "]";
      only_keys(ties[k], p, {"from", "to", "reactance", "capacity"});
      c.tielines.push_back({bus_ref(need(ties[k], "from", p), p + ".from"), bus_ref(need(ties[k], "to", p), p + ".to"),
                            number(need(ties[k], "reactance", p), p + ".reactance"),
                            number(need(ties[k], "capacity", p), p + ".capacity")});
    }
  }
  c.slack = bus_ref(need(j, "slack", ""), "slack");
  if (j.contains("options")) c.options = parse_options(j["options"]);
  validate(c);
  return c;
}

inline CaseSpec parse_case(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("syntax", "byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    return case_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("type_error", e.what());
  }
}

inline nlohmann::ordered_json options_to_json(const SolverOptions& o) {
  nlohmann::ordered_json j;
  j["epsilon"] = o.epsilon;
  j["tol_opt"] = o.tol_opt;
  j["tol_feas"] = o.tol_feas;
  j["tol_v"] = o.tol_v;
  if (o.big_m.automatic) j["big_m"] = "auto";
  else j["big_m"] = o.big_m.value;
  j["big_m_fallback"] = o.big_m_fallback;
  j["max_outer_iters"] = o.max_outer_iters;
  j["max_iters"] = o.max_iters;
  j["lex_tiebreak"] = o.lex_tiebreak;
  j["seed"] = o.seed;
  return j;
}

inline nlohmann::ordered_json case_to_json(const CaseSpec& c) {
  using Json = nlohmann::ordered_json;
  auto rng = [](const Range& r) { return Json::array({r.lo, r.hi}); };
  auto ref = [](const BusRef& r) {
    Json j;
    j["area"] = r.area;
    j["bus"] = r.bus;
    return j;
  };
  Json j;
  j["base_mva"] = c.base_mva;
  j["areas"] = Json::array();
  for (const auto& a : c.areas) {
    Json ja;
    ja["id"] = a.id;
    ja["buses"] = Json::array();
    for (const auto& b : a.buses) {
      Json jb;
      jb["id"] = b.id;
      if (b.kind == BusKind::boundary) {
        jb["kind"] = "boundary";
      } else {
        jb["kind"] = "internal";
        jb["gen"] = rng(b.gen);
        jb["wind"] = rng(b.wind);
        jb["demand_min"] = rng(b.demand_min);
        jb["demand_max"] = rng(b.demand_max);
        jb["price_gen"] = b.price_gen;
        jb["price_wind"] = b.price_wind;
        jb["price_demand"] = b.price_demand;
      }
      ja["buses"].push_back(std::move(jb));
    }
    ja["branches"] = Json::array();
    for (const auto& br : a.branches) {
      Json jb;
      jb["from"] = br.from;
      jb["to"] = br.to;
      jb["reactance"] = br.reactance;
      jb["capacity"] = br.capacity;
      ja["branches"].push_back(std::move(jb));
    }
    j["areas"].push_back(std::move(ja));
  }
  j["tielines"] = Json::array();
  for (const auto& t : c.tielines) {
    Json jt;
    jt["from"] = ref(t.from);
    jt["to"] = ref(t.to);
    jt["reactance"] = t.reactance;
    jt["capacity"] = t.capacity;
    j["tielines"].push_back(std::move(jt));
  }
  j["slack"] = ref(c.slack);
  j["options"] = options_to_json(c.options);
  return j;
}

inline std::string emit_case(const CaseSpec& c) { return case_to_json(c).dump(2) + "\n"; }

// FNV-1a over the compact canonical serialization.
inline std::string case_digest(const CaseSpec& c) {
  const std::string text = case_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tieline
