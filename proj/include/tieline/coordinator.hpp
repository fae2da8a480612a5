#pragma once

// Region exploration by a coordinator that only sees critical regions.
//
// Each system operator (SO) owns its area model and its scenario set and
// answers queries at a point y with a polytope {z : D z <= d} and an affine
// piece alpha'z + beta of its cost there. The coordinator combines the
// answers, minimizes the combined piece over the combined region, keeps the
// best point y* with the gradients seen around it, and probes a short step
// along the negative min-norm direction until that direction vanishes.
//
// Every message crossing the boundary is recorded in a transcript, one JSON
// object per line.

#include <Eigen/Dense>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tieline/casefile.hpp"
#include "tieline/direction_qp.hpp"
#include "tieline/error.hpp"
#include "tieline/lp.hpp"
#include "tieline/mplp.hpp"
#include "tieline/netmodel.hpp"
#include "tieline/polytope.hpp"

namespace tieline {

struct CrQuery {
  int area = 0;
  Vec y;
};

struct CrResponse {
  int area = 0;
  Mat D;
  Vec d;
  Vec alpha;
  double beta = 0.0;
};

struct WcQuery {
  int area = 0;
  Vec y;
};

struct WcResponse {
  int area = 0;
  double J_opt = 0.0;
};

namespace detail {

inline nlohmann::ordered_json to_json(const Vec& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline nlohmann::ordered_json to_json(const Mat& m) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
  return a;
}

}  // namespace detail

class Transcript {
 public:
  void record(const CrQuery& q) {
    add({{"schema", "cr_query"}, {"area", q.area}, {"y", detail::to_json(q.y)}});
  }
  void record(const CrResponse& r) {
    add({{"schema", "cr_response"},
         {"area", r.area},
         {"D", detail::to_json(r.D)},
         {"d", detail::to_json(r.d)},
         {"alpha", detail::to_json(r.alpha)},
         {"beta", r.beta}});
  }
  void record(const WcQuery& q) {
    add({{"schema", "wc_query"}, {"area", q.area}, {"y", detail::to_json(q.y)}});
  }
  void record(const WcResponse& r) { add({{"schema", "wc_response"}, {"area", r.area}, {"J_opt", r.J_opt}}); }

  const std::vector<std::string>& lines() const { return lines_; }
  std::string dump() const {
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
  }

 private:
  void add(const nlohmann::ordered_json& j) { lines_.push_back(j.dump()); }
  std::vector<std::string> lines_;
};

// Keys allowed per message schema; anything else in a transcript is a leak.
inline bool transcript_line_valid(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string()) return false;
  const std::string s = j["schema"];
  auto keys_are = [&](std::initializer_list<const char*> keys) {
    if (j.size() != keys.size()) return false;
    for (const char* k : keys)
      if (!j.contains(k)) return false;
    return j["area"].is_number_integer();
  };
  auto numbers = [](const nlohmann::json& a) {
    if (!a.is_array()) return false;
    for (const auto& x : a)
      if (!x.is_number()) return false;
    return true;
  };
  if (s == "cr_query" || s == "wc_query") return keys_are({"schema", "area", "y"}) && numbers(j["y"]);
  if (s == "cr_response") {
    if (!keys_are({"schema", "area", "D", "d", "alpha", "beta"})) return false;
    if (!j["D"].is_array()) return false;
    for (const auto& row : j["D"])
      if (!numbers(row)) return false;
    return numbers(j["d"]) && numbers(j["alpha"]) && j["beta"].is_number();
  }
  if (s == "wc_response") return keys_are({"schema", "area", "J_opt"}) && j["J_opt"].is_number();
  return false;
}

// One area's operator. It holds the scenario set; the cost answered at y is
// the max over that set of the area's optimal dispatch cost.
class SystemOperator {
 public:
  SystemOperator(AreaModel area, CouplingPolytope coupling, std::vector<Vec> scenarios)
      : area_(std::move(area)), coupling_(std::move(coupling)), scenarios_(std::move(scenarios)) {
    if (scenarios_.empty()) throw InputError("empty_scenarios", "operator needs at least one scenario");
  }
  virtual ~SystemOperator() = default;

  int id() const { return area_.id; }
  std::size_t scenario_count() const { return scenarios_.size(); }
  void set_region_options(const RegionOptions& o) { region_opt_ = o; }

  virtual CrResponse answer(const CrQuery& q) const {
    const MaxRegion mr = max_over_vertices_region(area_, coupling_, q.y, scenarios_, region_opt_);
    return {area_.id, mr.region.D, mr.region.d, mr.region.alpha, mr.region.beta};
  }

  // Optimal dispatch at y under the worst scenario held.
  AreaSolution dispatch(const Vec& y) const {
    AreaSolution best;
    bool first = true;
    for (const Vec& xi : scenarios_) {
      AreaSolution s = solve_parametric_point(area_, y, xi);
      if (first || s.cost > best.cost) best = std::move(s);
      first = false;
    }
    return best;
  }

  // Scenario-side access for the worst-case step, which runs inside the SO.
  const AreaModel& area() const { return area_; }
  const std::vector<Vec>& scenarios() const { return scenarios_; }
  bool has_scenario(const Vec& xi) const {
    for (const Vec& s : scenarios_)
      if (s == xi) return true;
    return false;
  }
  void add_scenario(Vec xi) { scenarios_.push_back(std::move(xi)); }

 private:
  AreaModel area_;
  CouplingPolytope coupling_;
  std::vector<Vec> scenarios_;
  RegionOptions region_opt_;
};

struct GuardEvents {
  int epsilon_halvings = 0;  // probe landed in an already explored region
  int projections = 0;       // probe left Y and was projected back
  int big_m_fallbacks = 0;
  int big_m_escalations = 0;
  int non_vertex = 0;        // accepted y* not pinned by dim active rows
  int direction_violations = 0;  // alpha'v <= 0 for some alpha with v != 0

  GuardEvents& operator+=(const GuardEvents& o) {
    epsilon_halvings += o.epsilon_halvings;
    projections += o.projections;
    big_m_fallbacks += o.big_m_fallbacks;
    big_m_escalations += o.big_m_escalations;
    non_vertex += o.non_vertex;
    direction_violations += o.direction_violations;
    return *this;
  }
};

struct ExploreStep {
  int iteration = 0;
  double J_opt = 0.0;   // minimum over the combined region just explored
  double J_star = 0.0;  // incumbent after the step
  bool improved = false;
  double v_norm = 0.0;
  int halvings = 0;  // epsilon halvings spent before this probe
  double seconds = 0.0;  // wall time of the step; reported only on request
};

struct DetResult {
  Vec y_star;
  double cost = 0.0;
  int iterations = 0;
  int regions_explored = 0;
  double v_norm = 0.0;
  std::vector<ExploreStep> steps;
  GuardEvents guards;
  std::vector<CriticalRegion> regions;  // combined regions, when requested
};

struct ExploreOptions {
  bool keep_regions = false;
  const Vec* start = nullptr;  // defaults to y = 0
};

namespace detail {

inline bool same_piece(const Vec& a1, double b1, const Vec& a2, double b2) {
  const double s = 1.0 + std::max(a1.lpNorm<Eigen::Infinity>(), std::abs(b1));
  return (a1 - a2).lpNorm<Eigen::Infinity>() <= 1e-9 * s && std::abs(b1 - b2) <= 1e-9 * s;
}

inline int active_rank(const Polytope& p, const Vec& z, double tol) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    if (std::abs(p.A.row(r).dot(z) - p.b(r)) <= tol * std::max(1.0, p.A.row(r).norm())) rows.push_back(r);
  if (rows.empty()) return 0;
  Mat M(static_cast<Eigen::Index>(rows.size()), p.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = p.A.row(rows[i]);
  Eigen::FullPivLU<Mat> lu(M);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

}  // namespace detail

inline DetResult explore(const std::vector<SystemOperator*>& sos, const CouplingPolytope& Y, const SolverOptions& opt,
                         Transcript* transcript = nullptr, const ExploreOptions& eo = {}) {
  if (sos.empty()) throw InputError("no_areas", "exploration needs at least one operator");
  const Polytope Yp{Y.G, Y.h};
  RegionOptions ropt;
  ropt.tol_feas = opt.tol_feas;
  ropt.tol_opt = opt.tol_opt;
  LpOptions lpo;
  lpo.tol_feas = std::min(lpo.tol_feas, opt.tol_feas);

  DetResult res;
  Vec y = eo.start ? *eo.start : Vec::Zero(Y.dim);
  if (!Yp.contains(y, opt.tol_feas)) throw InputError("start_outside_y", "start point is outside Y");
  double J_star = std::numeric_limits<double>::infinity();
  Vec y_star = y;
  std::vector<Vec> D;
  std::vector<std::pair<Vec, double>> seen;  // pieces explored since y* was set
  double eps = opt.epsilon;
  int halvings = 0;

  for (int it = 0; it < opt.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CriticalRegion> parts;
    for (SystemOperator* so : sos) {
      const CrQuery q{so->id(), y};
      if (transcript) transcript->record(q);
      const CrResponse r = so->answer(q);
      if (transcript) transcript->record(r);
      CriticalRegion cr;
      cr.D = r.D;
      cr.d = r.d;
      cr.alpha = r.alpha;
      cr.beta = r.beta;
      if (r.area != so->id() || r.alpha.size() != Y.dim || r.D.cols() != Y.dim || !cr.contains(y, 1e-7))
        throw SolverError("response_rejected", "area " + std::to_string(so->id()) + " answered a region without y");
      parts.push_back(std::move(cr));
    }
    CriticalRegion P = combine(parts, ropt);
    ++res.regions_explored;

    LpProblem lp;
    lp.c = P.alpha;
    lp.A = P.D;
    lp.b = P.d;
    const LpSolution s = solve_lex_smallest(lp, lpo);
    if (!s.optimal()) throw SolverError("region_lp", std::string("region minimization ended ") + to_string(s.status));
    const Vec y_opt = s.z;
    const double J_opt = P.value(y_opt);
    if (detail::active_rank(P.polytope(), y_opt, 1e-7) < Y.dim) ++res.guards.non_vertex;

    ExploreStep step;
    step.iteration = it + 1;
    step.J_opt = J_opt;
    step.halvings = halvings;
    const bool improved = J_opt < J_star - opt.tol_opt * (1.0 + std::abs(J_opt));
    if (improved) {
      y_star = y_opt;
      J_star = J_opt;
      D = {P.alpha};
      seen = {{P.alpha, P.beta}};
      eps = opt.epsilon;
      halvings = 0;
    } else {
      bool repeat = false;
      for (const auto& [a, b] : seen) repeat = repeat || detail::same_piece(a, b, P.alpha, P.beta);
      if (repeat) {
        ++res.guards.epsilon_halvings;
        if (++halvings > 20)
          throw SolverError("epsilon_guard", "probe kept landing in explored regions after 20 halvings");
        eps *= 0.5;
      } else {
        D.push_back(P.alpha);
        seen.emplace_back(P.alpha, P.beta);
        eps = opt.epsilon;
        halvings = 0;
      }
    }
    step.improved = improved;
    step.J_star = J_star;
    if (eo.keep_regions) res.regions.push_back(P);

    const DirectionResult dir = min_norm_direction(D, normal_cone(Yp, y_star, 1e-9), opt.tol_v);
    step.v_norm = dir.v.norm();
    step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.steps.push_back(step);
    res.iterations = it + 1;
    if (dir.zero) {
      res.y_star = y_star;
      res.cost = J_star;
      res.v_norm = step.v_norm;
      return res;
    }
    for (const Vec& a : D)
      if (a.dot(dir.v) <= 0.0) ++res.guards.direction_violations;

    // Unit step from y* against v; Y is convex and -v is feasible for the
    // rows active at y*, so only a long step can leave Y.
    y = y_star - eps * dir.v / dir.v.norm();
    if (!Yp.contains(y, 0.0)) {
      ++res.guards.projections;
      y = project(Yp, y, y_star);
    }
  }
  throw SolverError("iteration_cap", "region exploration exceeded " + std::to_string(opt.max_iters) + " iterations");
}

struct DetSolution {
  DetResult run;
  std::vector<AreaSolution> dispatch;
};

// Deterministic schedule: each area answers at its own fixed xi.
inline DetSolution solve_deterministic(const NetworkModel& net, const std::vector<Vec>& xi, const SolverOptions& opt,
                                       Transcript* transcript = nullptr, const ExploreOptions& eo = {}) {
  if (xi.size() != net.areas.size()) throw InputError("dimension_mismatch", "one xi per area is required");
  std::vector<SystemOperator> sos;
  for (std::size_t i = 0; i < net.areas.size(); ++i) sos.emplace_back(net.areas[i], net.coupling, std::vector<Vec>{xi[i]});
  std::vector<SystemOperator*> ptrs;
  for (auto& s : sos) ptrs.push_back(&s);
  DetSolution out;
  out.run = explore(ptrs, net.coupling, opt, transcript, eo);
  for (const auto& s : sos) out.dispatch.push_back(s.dispatch(out.run.y_star));
  return out;
}

// Nominal scenario of each area: the midpoint of every range.
inline std::vector<Vec> nominal_xi(const NetworkModel& net) {
  std::vector<Vec> xi;
  for (const auto& a : net.areas) xi.push_back(0.5 * (a.xi_lo + a.xi_hi));
  return xi;
}

}  // namespace tieline
