#pragma once

// Worst-case scenario search and the alternating min-max loop.
//
// For fixed y, J*(y, xi) is convex in xi, so its maximum over the box sits at
// a vertex xi = xi_lo + Delta w with w binary. By LP duality,
//   J*(y, xi) = max_{lambda >= 0, c_x + A_x' lambda = 0}
//               c0 + c_xi'xi + (A_xi xi + A_y y - b)' lambda,
// and the product terms w_j * Delta_j (c_xi + A_xi' lambda)_j are linearized
// with rho_j <= M w_j and rho_j <= M (1 - w_j) + Delta_j (c_xi + A_xi' lambda)_j.
//
// The loop alternates a min step (region exploration over the max of each
// area's cost across its scenario set) with a max step (each operator solves
// its worst-case program at y* and adds the maximizing vertex to its set).

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "tieline/casefile.hpp"
#include "tieline/coordinator.hpp"
#include "tieline/error.hpp"
#include "tieline/lp.hpp"
#include "tieline/milp.hpp"
#include "tieline/netmodel.hpp"

namespace tieline {

struct UncertaintyBox {
  Vec lo, hi;
  Vec delta() const { return hi - lo; }
};

inline UncertaintyBox box_of(const AreaModel& a) { return {a.xi_lo, a.xi_hi}; }

// Variable layout of the worst-case program: [w | rho | lambda].
struct WorstCaseMilp {
  MilpProblem milp;  // minimizes the negated objective
  double constant = 0.0;
  Eigen::Index nxi = 0, m = 0;

  double value(double milp_value) const { return constant - milp_value; }
};

inline WorstCaseMilp build_worstcase_milp(const AreaModel& a, const Vec& y, const UncertaintyBox& box, double M) {
  if (!(M > 0.0)) throw InputError("option_nonpositive", "big-M must be positive");
  const Eigen::Index k = a.nxi(), m = a.m, nx = a.nx();
  const Vec delta = box.delta();
  WorstCaseMilp out;
  out.nxi = k;
  out.m = m;
  out.constant = a.c0 + a.c_xi.dot(box.lo);
  LpProblem& lp = out.milp.lp;
  const Eigen::Index nv = 2 * k + m;
  lp.c = Vec::Zero(nv);
  lp.c.segment(k, k).setConstant(-1.0);
  lp.c.tail(m) = -(a.A_xi * box.lo + a.A_y * y - a.b);
  lp.A = Mat::Zero(0, nv);
  // Dual feasibility: A_x' lambda = -c_x.
  for (Eigen::Index j = 0; j < nx; ++j) {
    Vec row = Vec::Zero(nv);
    row.tail(m) = a.A_x.col(j);
    lp.add_row(row, -a.c_x(j), true);
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    Vec row = Vec::Zero(nv);
    row(2 * k + r) = -1.0;
    lp.add_row(row, 0.0);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (delta(j) > 0.0) {
      out.milp.binary_vars.push_back(static_cast<int>(j));
      Vec row = Vec::Zero(nv);
      row(k + j) = 1.0;
      row(j) = -M;
      lp.add_row(row, 0.0);
      row(j) = M;
      row.tail(m) = -delta(j) * a.A_xi.col(j);
      lp.add_row(row, M + delta(j) * a.c_xi(j));
    } else {
      // No width: the selector is pinned and rho contributes nothing.
      Vec row = Vec::Zero(nv);
      row(j) = 1.0;
      lp.add_row(row, 0.0, true);
      row(j) = 0.0;
      row(k + j) = 1.0;
      lp.add_row(row, 0.0);
    }
  }
  return out;
}

inline Vec recover_xi(const Vec& w, const UncertaintyBox& box) { return box.lo + box.delta().cwiseProduct(w); }

struct BigMChoice {
  double M = 1.0;
  bool fallback = false;  // a bounding LP was unbounded
};

// 2 * max_j Delta_j |c_xi + A_xi' lambda|_j over the dual polyhedron, at least 1.
inline BigMChoice choose_big_m(const AreaModel& a, const UncertaintyBox& box, double fallback_m) {
  const Eigen::Index m = a.m, nx = a.nx();
  const Vec delta = box.delta();
  LpProblem lp;
  lp.c = Vec::Zero(m);
  lp.A = Mat::Zero(0, m);
  for (Eigen::Index j = 0; j < nx; ++j) lp.add_row(a.A_x.col(j), -a.c_x(j), true);
  for (Eigen::Index r = 0; r < m; ++r) {
    Vec row = Vec::Zero(m);
    row(r) = -1.0;
    lp.add_row(row, 0.0);
  }
  BigMChoice out;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.nxi(); ++j) {
    if (delta(j) <= 0.0) continue;
    for (double sign : {1.0, -1.0}) {
      lp.c = -sign * a.A_xi.col(j);
      const LpSolution s = solve(lp);
      if (s.status == LpStatus::unbounded) return {fallback_m, true};
      if (s.status == LpStatus::infeasible)
        throw SolverError("dual_infeasible", "area " + std::to_string(a.id) + ": dispatch LP is unbounded below");
      worst = std::max(worst, delta(j) * std::abs(a.c_xi(j) - s.value * sign));
    }
  }
  out.M = std::max(1.0, 2.0 * worst);
  return out;
}

struct WorstCase {
  double value = 0.0;
  Vec w;
  Vec xi;
  double M = 0.0;
  int nodes = 0;
  GuardEvents guards;
};

// Maximizes J*(y, .) over the area's box. The result is re-priced by a direct
// dispatch solve at the recovered vertex, and M is accepted only once the
// value survives a re-solve with 10 M.
inline WorstCase solve_worst_case(const AreaModel& a, const Vec& y, const SolverOptions& opt) {
  const UncertaintyBox box = box_of(a);
  WorstCase out;
  double M;
  if (opt.big_m.automatic) {
    const BigMChoice c = choose_big_m(a, box, opt.big_m_fallback);
    M = c.M;
    if (c.fallback) ++out.guards.big_m_fallbacks;
  } else {
    M = opt.big_m.value;
  }
  MilpOptions mo;
  mo.tol_opt = std::min(1e-9, opt.tol_opt);
  auto run = [&](double bigm, WorstCase& wc) {
    const WorstCaseMilp p = build_worstcase_milp(a, y, box, bigm);
    const MilpSolution s = solve_milp(p.milp, mo);
    if (!s.optimal())
      throw SolverError("worst_case_milp", "area " + std::to_string(a.id) + ": worst-case program ended " +
                                               to_string(s.status));
    wc.value = p.value(s.value);
    wc.w = s.z.head(p.nxi);
    wc.xi = recover_xi(wc.w, box);
    wc.M = bigm;
    wc.nodes += s.nodes;
  };
  run(M, out);
  for (int escalation = 0;; ++escalation) {
    WorstCase wider;
    run(10.0 * out.M, wider);
    out.nodes += wider.nodes;
    if (std::abs(wider.value - out.value) <= opt.tol_opt * (1.0 + std::abs(out.value))) break;
    if (escalation == 3)
      throw SolverError("big_m", "area " + std::to_string(a.id) + ": worst-case value still moves with M = " +
                                     std::to_string(wider.M));
    ++out.guards.big_m_escalations;
    const int nodes = out.nodes;
    const GuardEvents g = out.guards;
    out = wider;
    out.nodes = nodes;
    out.guards = g;
  }
  const double direct = solve_parametric_point(a, y, out.xi).cost;
  if (std::abs(direct - out.value) > 1e-7 * (1.0 + std::abs(direct)))
    throw SolverError("worst_case_mismatch", "area " + std::to_string(a.id) + ": worst-case value " +
                                                 std::to_string(out.value) + " but dispatch at that vertex costs " +
                                                 std::to_string(direct));
  return out;
}

// First scenario: least wind, highest demand floor and ceiling.
inline Vec initial_scenario(const AreaModel& a) {
  Vec xi = a.xi_lo;
  xi.tail(2 * a.n) = a.xi_hi.tail(2 * a.n);
  return xi;
}

// Operator-side half of the max step.
struct MaxStep {
  WcResponse response;
  bool added = false;
  int nodes = 0;
  GuardEvents guards;
};

inline MaxStep answer_worst_case(SystemOperator& so, const WcQuery& q, const SolverOptions& opt) {
  const WorstCase wc = solve_worst_case(so.area(), q.y, opt);
  MaxStep out;
  out.response = {so.id(), wc.value};
  out.nodes = wc.nodes;
  out.guards = wc.guards;
  if (so.has_scenario(wc.xi)) {
    const double held = so.dispatch(q.y).cost;
    if (wc.value > held + opt.tol_opt * (1.0 + std::abs(held)))
      throw SolverError("duplicate_scenario", "area " + std::to_string(so.id()) +
                                                  ": worst case repeats a held scenario yet exceeds it (" +
                                                  std::to_string(wc.value) + " > " + std::to_string(held) +
                                                  "); tolerances are inconsistent");
  } else {
    so.add_scenario(wc.xi);
    out.added = true;
  }
  return out;
}

struct OuterStep {
  int iteration = 0;
  double lower = 0.0;  // J* of the min step
  double upper = 0.0;  // sum of worst-case values at y*
  int regions_explored = 0;
  int explore_iterations = 0;
  double v_norm = 0.0;
  int milp_nodes = 0;
  double min_seconds = 0.0;  // wall times, reported only on request
  double max_seconds = 0.0;
};

struct RobustResult {
  Vec y_star;
  double cost = 0.0;
  std::vector<OuterStep> steps;
  std::vector<std::size_t> scenario_counts;
  GuardEvents guards;
  int sandwich_violations = 0;
  int direction_violations = 0;
};

inline RobustResult solve_robust(const NetworkModel& net, const SolverOptions& opt, Transcript* transcript = nullptr) {
  std::vector<SystemOperator> sos;
  for (const auto& a : net.areas) sos.emplace_back(a, net.coupling, std::vector<Vec>{initial_scenario(a)});
  std::vector<SystemOperator*> ptrs;
  for (auto& s : sos) ptrs.push_back(&s);

  RobustResult out;
  Vec y = Vec::Zero(net.coupling.dim);
  for (int it = 1; it <= opt.max_outer_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    ExploreOptions eo;
    eo.start = &y;
    const DetResult det = explore(ptrs, net.coupling, opt, transcript, eo);
    out.guards += det.guards;
    y = det.y_star;
    OuterStep step;
    step.iteration = it;
    step.lower = det.cost;
    step.regions_explored = det.regions_explored;
    step.explore_iterations = det.iterations;
    step.v_norm = det.v_norm;
    const auto t1 = std::chrono::steady_clock::now();
    step.min_seconds = std::chrono::duration<double>(t1 - t0).count();
    bool grew = false;
    for (auto& so : sos) {
      const WcQuery q{so.id(), y};
      if (transcript) transcript->record(q);
      const MaxStep ms = answer_worst_case(so, q, opt);
      if (transcript) transcript->record(ms.response);
      step.upper += ms.response.J_opt;
      step.milp_nodes += ms.nodes;
      out.guards += ms.guards;
      grew = grew || ms.added;
    }
    step.max_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    const double tol = opt.tol_opt * (1.0 + std::abs(step.lower));
    if (step.lower > step.upper + tol) ++out.sandwich_violations;
    out.steps.push_back(step);
    if (step.upper <= step.lower + tol) {
      out.y_star = y;
      out.cost = step.lower;
      for (const auto& so : sos) out.scenario_counts.push_back(so.scenario_count());
      out.direction_violations = out.guards.direction_violations;
      return out;
    }
    if (!grew)
      throw SolverError("scenario_stall", "no operator found a new scenario but the bounds are " +
                                              std::to_string(step.lower) + " and " + std::to_string(step.upper));
  }
  throw SolverError("outer_iteration_cap",
                    "robust loop exceeded " + std::to_string(opt.max_outer_iters) + " outer iterations");
}

}  // namespace tieline
