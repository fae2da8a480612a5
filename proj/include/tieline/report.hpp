#pragma once

// Run reports: one JSON document per solve, with a fixed key order so that
// reruns with the same inputs produce identical bytes. Wall-clock timings are
// the only machine-dependent content and are written only on request.

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tieline/casefile.hpp"
#include "tieline/coordinator.hpp"
#include "tieline/error.hpp"
#include "tieline/harness.hpp"
#include "tieline/robust.hpp"

namespace tieline {

// One ledger row. Deterministic runs write one "explore" row per region
// visited (inner_iterations counts epsilon halvings before the probe).
// Robust runs write a "min" row (region exploration) and a "max" row
// (worst-case programs, inner_iterations counts branch-and-bound nodes) per
// outer iteration.
struct LedgerRow {
  int iteration = 0;
  std::string step;
  double cost = 0.0;
  int regions_explored = 0;
  int inner_iterations = 0;
  double v_norm = 0.0;
};

struct BoundRow {
  int iteration = 0;
  double lower = 0.0;
  double upper = 0.0;
};

struct Timings {
  double total_s = 0.0;
  std::vector<double> step_s;  // per ledger row
};

struct RunRecord {
  std::string case_digest;
  std::string mode;  // det, robust, oracle-det, oracle-robust, sample
  std::vector<LedgerRow> iterations;
  Vec y_star;
  double cost = 0.0;
  std::vector<BoundRow> bounds;
  std::vector<int> scenario_counts;
  std::optional<Timings> timings;
  GuardEvents guards;
  std::optional<SampleRecord> samples;
};

inline RunRecord record_deterministic(const CaseSpec& c, const DetResult& r) {
  RunRecord out;
  out.case_digest = case_digest(c);
  out.mode = "det";
  for (const ExploreStep& s : r.steps) out.iterations.push_back({s.iteration, "explore", s.J_star, 1, s.halvings, s.v_norm});
  out.y_star = r.y_star;
  out.cost = r.cost;
  out.guards = r.guards;
  return out;
}

// Per-row wall times, matching the ledger rows of the record builders.
inline Timings timings_of(const DetResult& r, double total_s) {
  Timings t{total_s, {}};
  for (const ExploreStep& s : r.steps) t.step_s.push_back(s.seconds);
  return t;
}

inline Timings timings_of(const RobustResult& r, double total_s) {
  Timings t{total_s, {}};
  for (const OuterStep& s : r.steps) {
    t.step_s.push_back(s.min_seconds);
    t.step_s.push_back(s.max_seconds);
  }
  return t;
}

inline RunRecord record_robust(const CaseSpec& c, const RobustResult& r) {
  RunRecord out;
  out.case_digest = case_digest(c);
  out.mode = "robust";
  for (const OuterStep& s : r.steps) {
    out.iterations.push_back({s.iteration, "min", s.lower, s.regions_explored, s.explore_iterations, s.v_norm});
    out.iterations.push_back({s.iteration, "max", s.upper, 0, s.milp_nodes, 0.0});
    out.bounds.push_back({s.iteration, s.lower, s.upper});
  }
  out.y_star = r.y_star;
  out.cost = r.cost;
  for (std::size_t n : r.scenario_counts) out.scenario_counts.push_back(static_cast<int>(n));
  out.guards = r.guards;
  return out;
}

namespace detail {

using OJson = nlohmann::ordered_json;

inline OJson vec_json(const Vec& v) {
  OJson a = OJson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <class T>
OJson list_json(const std::vector<T>& v) {
  OJson a = OJson::array();
  for (const T& x : v) a.push_back(x);
  return a;
}

inline OJson guards_json(const GuardEvents& g) {
  return OJson{{"epsilon_halvings", g.epsilon_halvings},   {"projections", g.projections},
               {"big_m_fallbacks", g.big_m_fallbacks},     {"big_m_escalations", g.big_m_escalations},
               {"non_vertex", g.non_vertex},               {"direction_violations", g.direction_violations}};
}

inline const OJson& field(const OJson& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw InputError("report_missing_key", path + ": missing \"" + key + "\"");
  return j[key];
}

inline void exact_keys(const OJson& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InputError("report_type", path + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw InputError("report_unknown_key", path + ": unknown key \"" + k + "\"");
  }
}

inline double num(const OJson& j, const char* key, const std::string& path) {
  const OJson& v = field(j, key, path);
  if (!v.is_number()) throw InputError("report_type", path + "." + key + ": expected a number");
  return v.get<double>();
}

inline int whole(const OJson& j, const char* key, const std::string& path) {
  const OJson& v = field(j, key, path);
  if (!v.is_number_integer()) throw InputError("report_type", path + "." + key + ": expected an integer");
  return v.get<int>();
}

inline std::vector<double> num_list(const OJson& j, const char* key, const std::string& path) {
  const OJson& v = field(j, key, path);
  if (!v.is_array()) throw InputError("report_type", path + "." + key + ": expected an array");
  std::vector<double> out;
  for (const OJson& x : v) {
    if (!x.is_number()) throw InputError("report_type", path + "." + key + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::vector<int> int_list(const OJson& j, const char* key, const std::string& path) {
  const OJson& v = field(j, key, path);
  if (!v.is_array()) throw InputError("report_type", path + "." + key + ": expected an array");
  std::vector<int> out;
  for (const OJson& x : v) {
    if (!x.is_number_integer()) throw InputError("report_type", path + "." + key + ": expected integers");
    out.push_back(x.get<int>());
  }
  return out;
}

}  // namespace detail

inline std::string emit_report(const RunRecord& r) {
  using detail::OJson;
  OJson j;
  j["case_digest"] = r.case_digest;
  j["mode"] = r.mode;
  OJson rows = OJson::array();
  for (const LedgerRow& row : r.iterations)
    rows.push_back(OJson{{"iteration", row.iteration},
                         {"step", row.step},
                         {"cost", row.cost},
                         {"regions_explored", row.regions_explored},
                         {"inner_iterations", row.inner_iterations},
                         {"v_norm", row.v_norm}});
  j["iterations"] = rows;
  j["y_star"] = detail::vec_json(r.y_star);
  j["cost"] = r.cost;
  OJson bounds = OJson::array();
  for (const BoundRow& b : r.bounds)
    bounds.push_back(OJson{{"iteration", b.iteration}, {"lower", b.lower}, {"upper", b.upper}});
  j["bounds"] = bounds;
  j["scenario_counts"] = detail::list_json(r.scenario_counts);
  if (r.timings) j["timings"] = OJson{{"total_s", r.timings->total_s}, {"step_s", detail::list_json(r.timings->step_s)}};
  j["guard_events"] = detail::guards_json(r.guards);
  if (r.samples) {
    const SampleRecord& s = *r.samples;
    j["samples"] = OJson{{"n", s.n},
                         {"seed", s.seed},
                         {"j_rob", s.j_rob},
                         {"max_p2", s.max_p2},
                         {"violations", s.violations},
                         {"p1", detail::list_json(s.p1)},
                         {"p2", detail::list_json(s.p2)},
                         {"histogram",
                          OJson{{"edges", detail::list_json(s.histogram.edges)},
                                {"p1", detail::list_json(s.histogram.p1)},
                                {"p2", detail::list_json(s.histogram.p2)}}}};
  }
  return j.dump(2) + "\n";
}

inline RunRecord parse_report(const std::string& text) {
  using detail::OJson;
  OJson j;
  try {
    j = OJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("report_syntax", e.what());
  }
  detail::exact_keys(j, "report",
                     {"case_digest", "mode", "iterations", "y_star", "cost", "bounds", "scenario_counts", "timings",
                      "guard_events", "samples"});
  RunRecord r;
  const OJson& digest = detail::field(j, "case_digest", "report");
  const OJson& mode = detail::field(j, "mode", "report");
  if (!digest.is_string() || !mode.is_string()) throw InputError("report_type", "report: digest and mode are strings");
  r.case_digest = digest.get<std::string>();
  r.mode = mode.get<std::string>();
  const OJson& rows = detail::field(j, "iterations", "report");
  if (!rows.is_array()) throw InputError("report_type", "report.iterations: expected an array");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::string p = "report.iterations[" + std::to_string(k) + "]";
    const OJson& row = rows[k];
    detail::exact_keys(row, p, {"iteration", "step", "cost", "regions_explored", "inner_iterations", "v_norm"});
    const OJson& step = detail::field(row, "step", p);
    if (!step.is_string()) throw InputError("report_type", p + ".step: expected a string");
    r.iterations.push_back({detail::whole(row, "iteration", p), step.get<std::string>(), detail::num(row, "cost", p),
                            detail::whole(row, "regions_explored", p), detail::whole(row, "inner_iterations", p),
                            detail::num(row, "v_norm", p)});
  }
  const std::vector<double> y = detail::num_list(j, "y_star", "report");
  r.y_star = Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(y.size()));
  r.cost = detail::num(j, "cost", "report");
  const OJson& bounds = detail::field(j, "bounds", "report");
  if (!bounds.is_array()) throw InputError("report_type", "report.bounds: expected an array");
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    const std::string p = "report.bounds[" + std::to_string(k) + "]";
    detail::exact_keys(bounds[k], p, {"iteration", "lower", "upper"});
    r.bounds.push_back(
        {detail::whole(bounds[k], "iteration", p), detail::num(bounds[k], "lower", p), detail::num(bounds[k], "upper", p)});
  }
  r.scenario_counts = detail::int_list(j, "scenario_counts", "report");
  if (j.contains("timings")) {
    const OJson& t = j["timings"];
    detail::exact_keys(t, "report.timings", {"total_s", "step_s"});
    r.timings = Timings{detail::num(t, "total_s", "report.timings"), detail::num_list(t, "step_s", "report.timings")};
  }
  const OJson& g = detail::field(j, "guard_events", "report");
  const std::string gp = "report.guard_events";
  detail::exact_keys(g, gp,
                     {"epsilon_halvings", "projections", "big_m_fallbacks", "big_m_escalations", "non_vertex",
                      "direction_violations"});
  r.guards.epsilon_halvings = detail::whole(g, "epsilon_halvings", gp);
  r.guards.projections = detail::whole(g, "projections", gp);
  r.guards.big_m_fallbacks = detail::whole(g, "big_m_fallbacks", gp);
  r.guards.big_m_escalations = detail::whole(g, "big_m_escalations", gp);
  r.guards.non_vertex = detail::whole(g, "non_vertex", gp);
  r.guards.direction_violations = detail::whole(g, "direction_violations", gp);
  if (j.contains("samples")) {
    const OJson& s = j["samples"];
    const std::string sp = "report.samples";
    detail::exact_keys(s, sp, {"n", "seed", "j_rob", "max_p2", "violations", "p1", "p2", "histogram"});
    SampleRecord rec;
    rec.n = detail::whole(s, "n", sp);
    const OJson& seed = detail::field(s, "seed", sp);
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
      throw InputError("report_type", sp + ".seed: expected a nonnegative integer");
    rec.seed = seed.get<std::uint64_t>();
    rec.j_rob = detail::num(s, "j_rob", sp);
    rec.max_p2 = detail::num(s, "max_p2", sp);
    rec.violations = detail::whole(s, "violations", sp);
    rec.p1 = detail::num_list(s, "p1", sp);
    rec.p2 = detail::num_list(s, "p2", sp);
    const OJson& h = detail::field(s, "histogram", sp);
    detail::exact_keys(h, sp + ".histogram", {"edges", "p1", "p2"});
    rec.histogram.edges = detail::num_list(h, "edges", sp + ".histogram");
    rec.histogram.p1 = detail::int_list(h, "p1", sp + ".histogram");
    rec.histogram.p2 = detail::int_list(h, "p2", sp + ".histogram");
    r.samples = rec;
  }
  return r;
}

}  // namespace tieline
