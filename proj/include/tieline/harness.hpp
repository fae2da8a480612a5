#pragma once

// Brute-force references for the distributed solvers, and scenario sampling.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tieline/error.hpp"
#include "tieline/lp.hpp"
#include "tieline/netmodel.hpp"
#include "tieline/rng.hpp"

namespace tieline {

struct JointSolution {
  double value = 0.0;
  Vec y;
  std::vector<Vec> x;
};

// All areas and the coupling in one LP over (x_1, ..., x_k, y).
inline JointSolution oracle_joint(const NetworkModel& net, const std::vector<Vec>& xi) {
  if (xi.size() != net.areas.size()) throw InputError("dimension_mismatch", "one xi per area is required");
  const Eigen::Index ny = net.coupling.dim;
  Eigen::Index nvar = ny, nrow = net.coupling.G.rows();
  for (const auto& a : net.areas) {
    nvar += a.nx();
    nrow += a.m;
  }
  LpProblem lp;
  lp.c = Vec::Zero(nvar);
  lp.A = Mat::Zero(nrow, nvar);
  lp.b = Vec::Zero(nrow);
  const Eigen::Index ycol = nvar - ny;
  Eigen::Index col = 0, row = 0;
  double constant = 0.0;
  for (std::size_t i = 0; i < net.areas.size(); ++i) {
    const auto& a = net.areas[i];
    lp.c.segment(col, a.nx()) = a.c_x;
    lp.A.block(row, col, a.m, a.nx()) = a.A_x;
    lp.A.block(row, ycol, a.m, ny) = a.A_y;
    lp.b.segment(row, a.m) = a.b - a.A_xi * xi[i];
    constant += a.c0 + a.c_xi.dot(xi[i]);
    col += a.nx();
    row += a.m;
  }
  lp.A.block(row, ycol, net.coupling.G.rows(), ny) = net.coupling.G;
  lp.b.segment(row, net.coupling.G.rows()) = net.coupling.h;
  const LpSolution s = solve(lp);
  if (s.status == LpStatus::infeasible) throw SolverError("oracle_infeasible", "joint dispatch LP is infeasible");
  if (!s.optimal()) throw SolverError("oracle_unbounded", "joint dispatch LP is unbounded");
  JointSolution out;
  out.value = s.value + constant;
  out.y = s.z.tail(ny);
  col = 0;
  for (const auto& a : net.areas) {
    out.x.push_back(s.z.segment(col, a.nx()));
    col += a.nx();
  }
  return out;
}

// Indices where the box has positive width.
inline std::vector<int> uncertain_coords(const AreaModel& a) {
  std::vector<int> out;
  for (Eigen::Index k = 0; k < a.xi_lo.size(); ++k)
    if (a.xi_hi(k) > a.xi_lo(k)) out.push_back(static_cast<int>(k));
  return out;
}

// Every vertex of the area's box, in binary counting order over the
// uncertain coordinates (bit 0 is the first uncertain coordinate).
inline std::vector<Vec> box_vertices(const AreaModel& a) {
  const std::vector<int> u = uncertain_coords(a);
  std::vector<Vec> out;
  for (unsigned mask = 0; mask < (1u << u.size()); ++mask) {
    Vec xi = a.xi_lo;
    for (std::size_t k = 0; k < u.size(); ++k)
      if ((mask >> k) & 1u) xi(u[k]) = a.xi_hi(u[k]);
    out.push_back(xi);
  }
  return out;
}

struct RobustOracleResult {
  double value = 0.0;
  Vec y;
  int cuts = 0;
};

// min over y in Y of sum_i max over box vertices of J_i*(y, xi).
//
// This is the scenario-replicated epigraph LP
//   min sum_i t_i  s.t.  t_i >= c0 + c_xi'xi_s + c_x'x_{i,s},
//                        A_x x_{i,s} + A_y y <= b - A_xi xi_s,  y in Y,
// solved by Benders decomposition over y: each replica contributes the cut
// t_i >= J_i*(y_k, xi_s) + (A_y' lambda)'(y - y_k) from its optimal duals,
// and the loop stops when the master bound meets the best evaluated point.
inline RobustOracleResult oracle_robust_enum(const NetworkModel& net, int cap = 12, double tol = 1e-10) {
  int total = 0;
  for (const auto& a : net.areas) total += static_cast<int>(uncertain_coords(a).size());
  if (total > cap)
    throw InputError("oracle_cap", std::to_string(total) + " uncertain coordinates exceed the enumeration cap of " +
                                       std::to_string(cap));
  const Eigen::Index ny = net.coupling.dim;
  const auto k = static_cast<Eigen::Index>(net.areas.size());
  std::vector<std::vector<Vec>> verts;
  for (const auto& a : net.areas) verts.push_back(box_vertices(a));

  LpProblem master;
  master.c = Vec::Zero(ny + k);
  master.c.tail(k).setOnes();
  master.A = Mat::Zero(net.coupling.G.rows(), ny + k);
  master.A.leftCols(ny) = net.coupling.G;
  master.b = net.coupling.h;

  // Adds all cuts at y; returns F(y).
  RobustOracleResult out;
  auto cut_at = [&](const Vec& y) {
    double F = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& a = net.areas[static_cast<std::size_t>(i)];
      double worst = -std::numeric_limits<double>::infinity();
      for (const Vec& xi : verts[static_cast<std::size_t>(i)]) {
        const AreaSolution s = solve_parametric_point(a, y, xi);
        const Vec g = a.A_y.transpose() * s.lp.duals;
        worst = std::max(worst, s.cost);
        // t_i - g'y >= J - g'y_k  becomes  g'y - t_i <= g'y_k - J
        Vec row = Vec::Zero(ny + k);
        row.head(ny) = g;
        row(ny + i) = -1.0;
        master.add_row(row, g.dot(y) - s.cost);
        ++out.cuts;
      }
      F += worst;
    }
    return F;
  };

  Vec y = Vec::Zero(ny);
  double upper = cut_at(y);
  out.y = y;
  for (int it = 0; it < 1000; ++it) {
    const LpSolution m = solve(master);
    if (!m.optimal()) throw SolverError("oracle_master", std::string("robust oracle master ended ") + to_string(m.status));
    const double lower = m.value;
    if (upper - lower <= tol * (1.0 + std::abs(upper))) {
      out.value = upper;
      return out;
    }
    y = m.z.head(ny);
    const double F = cut_at(y);
    if (F < upper) {
      upper = F;
      out.y = y;
    }
  }
  throw SolverError("oracle_cap", "robust oracle did not close its gap");
}

// Sum of per-area dispatch costs with y held fixed.
inline double fixed_y_cost(const NetworkModel& net, const Vec& y, const std::vector<Vec>& xi) {
  double total = 0.0;
  for (std::size_t i = 0; i < net.areas.size(); ++i) total += solve_parametric_point(net.areas[i], y, xi[i]).cost;
  return total;
}

// Uniform draw from every area's box.
inline std::vector<Vec> sample_xi(const NetworkModel& net, Rng& rng) {
  std::vector<Vec> xi;
  for (const auto& a : net.areas) {
    Vec v = a.xi_lo;
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (a.xi_hi(j) > a.xi_lo(j)) v(j) = rng.uniform(a.xi_lo(j), a.xi_hi(j));
    xi.push_back(v);
  }
  return xi;
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<int> p1, p2;    // counts per bin
};

struct SampleRecord {
  int n = 0;
  std::uint64_t seed = 0;
  double j_rob = 0.0;
  std::vector<double> p1;  // joint optimum at each sample
  std::vector<double> p2;  // re-dispatch cost with y held at the robust schedule
  double max_p2 = 0.0;
  int violations = 0;  // samples breaking p1 <= p2 <= j_rob + tol
  Histogram histogram;
};

// Shared equal-width bins over the range of both cost lists.
inline Histogram histogram(const std::vector<double>& p1, const std::vector<double>& p2, int bins) {
  Histogram h;
  if (p1.empty() || bins < 1) return h;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* list : {&p1, &p2})
    for (double v : *list) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi <= lo) hi = lo + 1.0;
  for (int k = 0; k <= bins; ++k) h.edges.push_back(lo + (hi - lo) * k / bins);
  h.p1.assign(static_cast<std::size_t>(bins), 0);
  h.p2.assign(static_cast<std::size_t>(bins), 0);
  auto bin = [&](double v) {
    const int k = static_cast<int>((v - lo) / (hi - lo) * bins);
    return static_cast<std::size_t>(std::clamp(k, 0, bins - 1));
  };
  for (double v : p1) ++h.p1[bin(v)];
  for (double v : p2) ++h.p2[bin(v)];
  return h;
}

// Draws n scenarios uniformly from the boxes and prices each twice: with the
// schedule free (joint optimum) and with y fixed at y_rob. Samples run in
// order from one seeded stream, so the record is reproducible bit for bit.
inline SampleRecord sample_and_compare(const NetworkModel& net, const Vec& y_rob, double j_rob, int n,
                                       std::uint64_t seed, double tol = 1e-6, int bins = 20) {
  if (n < 1) throw InputError("option_nonpositive", "sample count must be positive");
  SampleRecord out;
  out.n = n;
  out.seed = seed;
  out.j_rob = j_rob;
  Rng rng(seed);
  const double slack = tol * (1.0 + std::abs(j_rob));
  for (int k = 0; k < n; ++k) {
    const std::vector<Vec> xi = sample_xi(net, rng);
    const double p1 = oracle_joint(net, xi).value;
    const double p2 = fixed_y_cost(net, y_rob, xi);
    out.p1.push_back(p1);
    out.p2.push_back(p2);
    if (p1 > p2 + tol * (1.0 + std::abs(p2)) || p2 > j_rob + slack) ++out.violations;
  }
  out.max_p2 = *std::max_element(out.p2.begin(), out.p2.end());
  out.histogram = histogram(out.p1, out.p2, bins);
  return out;
}

}  // namespace tieline
