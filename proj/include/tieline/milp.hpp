#pragma once

// Best-first branch and bound over the dense LP solver, for problems with a
// few dozen binaries. Minimizes c'z; callers maximizing negate c.
//
// Nodes are ordered by (relaxation bound, creation id). Branching picks the
// lowest-index fractional binary and creates the down branch first, so the
// search tree is a function of the input alone.

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "tieline/error.hpp"
#include "tieline/lp.hpp"

namespace tieline {

struct MilpProblem {
  LpProblem lp;
  std::vector<int> binary_vars;
};

struct MilpOptions {
  double gap = 0.0;        // relative gap accepted on top of tol_opt
  double tol_opt = 1e-9;   // relative slack for pruning
  double tol_int = 1e-7;   // distance to 0/1 treated as integral
  int max_nodes = 200000;
  LpOptions lp;
};

struct MilpSolution {
  LpStatus status = LpStatus::infeasible;
  Vec z;
  double value = 0.0;
  double bound = 0.0;  // best remaining relaxation bound at exit
  int nodes = 0;

  bool optimal() const { return status == LpStatus::optimal; }
};

namespace detail {

inline void fix_var(LpProblem& lp, int j, double v) {
  Vec e = Vec::Zero(lp.vars());
  e(j) = 1.0;
  lp.add_row(e, v, /*eq=*/true);
}

}  // namespace detail

inline MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opt = {}) {
  const Eigen::Index n = p.lp.vars();
  for (int j : p.binary_vars)
    if (j < 0 || j >= n) throw InputError("binary_out_of_range", "binary index " + std::to_string(j) + " out of range");
  LpProblem root = p.lp;
  for (int j : p.binary_vars) {
    Vec e = Vec::Zero(n);
    e(j) = 1.0;
    root.add_row(e, 1.0);
    root.add_row(-e, 0.0);
  }

  struct Node {
    double bound;
    int id;
    std::vector<std::pair<int, double>> fixed;
  };
  auto later = [](const Node& a, const Node& b) { return a.bound != b.bound ? a.bound > b.bound : a.id > b.id; };
  std::priority_queue<Node, std::vector<Node>, decltype(later)> open(later);

  MilpSolution out;
  bool have_incumbent = false;
  int next_id = 0;
  auto cutoff = [&](double bound) {
    if (!have_incumbent) return false;
    const double slack = opt.tol_opt * (1.0 + std::abs(out.value)) + opt.gap * std::abs(out.value);
    return bound >= out.value - slack;
  };
  auto relax = [&](const std::vector<std::pair<int, double>>& fixed) {
    // Fixed binaries move to the right-hand side so their coefficients (often
    // a big-M) no longer dominate the row scaling.
    LpProblem lp = root;
    for (const auto& [j, v] : fixed) {
      lp.b -= v * lp.A.col(j);
      lp.A.col(j).setZero();
      detail::fix_var(lp, j, v);
    }
    return solve(lp, opt.lp);
  };

  open.push({-detail::kInf, next_id++, {}});
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (cutoff(node.bound)) continue;
    if (++out.nodes > opt.max_nodes) {
      throw SolverError("milp_node_cap", "branch and bound node cap reached; incumbent " +
                                             (have_incumbent ? std::to_string(out.value) : std::string("none")) +
                                             ", bound " + std::to_string(node.bound));
    }
    const LpSolution s = relax(node.fixed);
    if (s.status == LpStatus::unbounded) {
      // The recession cone is shared by every slice, so the MILP is unbounded
      // only if some integer slice is feasible. Branch until one is fixed.
      int free_var = -1;
      for (int j : p.binary_vars) {
        const bool fixed = std::any_of(node.fixed.begin(), node.fixed.end(), [&](const auto& f) { return f.first == j; });
        if (!fixed) {
          free_var = j;
          break;
        }
      }
      if (free_var < 0) {
        out.status = LpStatus::unbounded;
        return out;
      }
      for (double v : {0.0, 1.0}) {
        Node child{node.bound, next_id++, node.fixed};
        child.fixed.emplace_back(free_var, v);
        open.push(std::move(child));
      }
      continue;
    }
    if (!s.optimal() || cutoff(s.value)) continue;
    int branch = -1;
    for (int j : p.binary_vars) {
      if (std::abs(s.z(j) - std::round(s.z(j))) > opt.tol_int) {
        branch = j;
        break;
      }
    }
    if (branch < 0) {
      // Integral: snap the binaries and re-solve for clean continuous values.
      std::vector<std::pair<int, double>> all;
      for (int j : p.binary_vars) all.emplace_back(j, std::round(s.z(j)));
      const LpSolution clean = relax(all);
      const LpSolution& use = clean.optimal() ? clean : s;
      if (!have_incumbent || use.value < out.value) {
        have_incumbent = true;
        out.status = LpStatus::optimal;
        out.value = use.value;
        out.z = use.z;
        for (int j : p.binary_vars) out.z(j) = std::round(s.z(j));
      }
      continue;
    }
    for (double v : {0.0, 1.0}) {
      Node child{s.value, next_id++, node.fixed};
      child.fixed.emplace_back(branch, v);
      open.push(std::move(child));
    }
  }
  out.bound = have_incumbent ? out.value : detail::kInf;
  return out;
}

}  // namespace tieline
