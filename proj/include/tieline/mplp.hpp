#pragma once

// Critical regions of the per-area parametric dispatch LP.
//
// For an optimal basis with defining rows B, the optimizer is affine in y,
//   x(z) = M (b_B - A_xi_B xi - A_y_B z),   M = A_x_B^{-1},
// and stays optimal while the remaining rows hold:
//   (A_y - A_x M A_y_B) z <= b - A_xi xi - A_x M (b_B - A_xi_B xi).
// Over that set J*(z) = alpha'z + beta.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tieline/error.hpp"
#include "tieline/lp.hpp"
#include "tieline/netmodel.hpp"
#include "tieline/polytope.hpp"

namespace tieline {

struct CriticalRegion {
  Mat D;
  Vec d;
  Vec alpha;
  double beta = 0.0;
  std::vector<int> active_fingerprint;

  double value(const Vec& z) const { return alpha.dot(z) + beta; }
  Polytope polytope() const { return {D, d}; }
  bool contains(const Vec& z, double tol) const { return polytope().contains(z, tol); }
};

struct RegionOptions {
  double tol_feas = 1e-8;
  double tol_opt = 1e-8;
  bool prune = true;  // drop redundant rows
};

namespace detail {

inline Polytope coupling_polytope(const CouplingPolytope& Y) { return {Y.G, Y.h}; }

// Normalizes, intersects with Y and prunes.
inline void finish_region(CriticalRegion& cr, const CouplingPolytope& Y, const RegionOptions& opt) {
  Polytope p = stack(normalized({cr.D, cr.d}), normalized(coupling_polytope(Y)));
  if (opt.prune) p = remove_redundant(p, opt.tol_feas);
  cr.D = std::move(p.A);
  cr.d = std::move(p.b);
}

}  // namespace detail

inline CriticalRegion area_region(const AreaModel& area, const CouplingPolytope& Y, const Vec& y, const Vec& xi,
                                  const RegionOptions& opt = {}) {
  LpOptions lpo;
  lpo.tol_feas = std::min(lpo.tol_feas, opt.tol_feas);
  const AreaSolution sol = solve_parametric_point(area, y, xi, lpo);
  const int nx = area.nx();

  // Defining rows of the basis, completed from the active set if the basis
  // left free columns without a row.
  std::vector<int> B = sol.lp.basis_rows;
  if (static_cast<int>(B.size()) < nx) {
    Mat rows(static_cast<Eigen::Index>(B.size()), nx);
    for (std::size_t i = 0; i < B.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = area.A_x.row(B[i]);
    for (int r : sol.lp.active_set) {
      if (static_cast<int>(B.size()) == nx) break;
      if (std::find(B.begin(), B.end(), r) != B.end()) continue;
      Mat trial(rows.rows() + 1, nx);
      trial << rows, area.A_x.row(r);
      Eigen::FullPivLU<Mat> lu(trial);
      lu.setThreshold(1e-10);
      if (lu.rank() == trial.rows()) {
        rows = std::move(trial);
        B.push_back(r);
      }
    }
    std::sort(B.begin(), B.end());
  }
  if (static_cast<int>(B.size()) != nx)
    throw SolverError("degenerate_region", "area " + std::to_string(area.id) + ": optimal basis has " +
                                               std::to_string(B.size()) + " defining rows for " +
                                               std::to_string(nx) + " variables");
  Mat AxB(nx, nx), AyB(nx, area.ydim());
  Vec rhsB(nx);
  const Vec b_xi = area.b - area.A_xi * xi;
  for (int i = 0; i < nx; ++i) {
    AxB.row(i) = area.A_x.row(B[i]);
    AyB.row(i) = area.A_y.row(B[i]);
    rhsB(i) = b_xi(B[i]);
  }
  Eigen::FullPivLU<Mat> lu(AxB);
  if (!lu.isInvertible())
    throw SolverError("degenerate_region", "area " + std::to_string(area.id) + ": basis rows are singular");
  const Mat Z = lu.solve(AyB);
  const Vec u = lu.solve(rhsB);

  CriticalRegion cr;
  cr.alpha = -Z.transpose() * area.c_x;
  cr.beta = area.c0 + area.c_xi.dot(xi) + area.c_x.dot(u);
  // Either half of a balance pair defines the same hyperplane, so the
  // fingerprint names the pair by its first row.
  const int n_eq = 2 * (area.n + area.nbar);
  for (int r : B) cr.active_fingerprint.push_back(r < n_eq ? r - r % 2 : r);

  std::vector<int> inactive;
  for (int r = 0, k = 0; r < area.m; ++r) {
    if (k < nx && B[k] == r) {
      ++k;
      continue;
    }
    inactive.push_back(r);
  }
  cr.D.resize(static_cast<Eigen::Index>(inactive.size()), area.ydim());
  cr.d.resize(static_cast<Eigen::Index>(inactive.size()));
  for (std::size_t i = 0; i < inactive.size(); ++i) {
    const int r = inactive[i];
    const auto row = static_cast<Eigen::Index>(i);
    cr.D.row(row) = area.A_y.row(r) - area.A_x.row(r) * Z;
    cr.d(row) = b_xi(r) - area.A_x.row(r).dot(u);
    // Rows that vanish up to round-off (the twin of a basis row, for one)
    // are dropped by normalization; clean them to exact zeros first.
    const double mag = area.A_y.row(r).lpNorm<Eigen::Infinity>() + area.A_x.row(r).lpNorm<Eigen::Infinity>() *
                                                                       std::max(1.0, Z.lpNorm<Eigen::Infinity>());
    if (cr.D.row(row).lpNorm<Eigen::Infinity>() <= 1e-11 * std::max(1.0, mag)) {
      if (cr.d(row) < -1e-7 * std::max(1.0, std::abs(b_xi(r))))
        throw SolverError("region_inconsistent", "area " + std::to_string(area.id) + ": constant row " +
                                                     std::to_string(r) + " violated at the basis");
      cr.D.row(row).setZero();
    }
  }

  const double j_lp = sol.cost;
  if (std::abs(cr.value(y) - j_lp) > 1e-7 * (1.0 + std::abs(j_lp)))
    throw SolverError("region_value_mismatch", "area " + std::to_string(area.id) + ": affine piece " +
                                                   std::to_string(cr.value(y)) + " disagrees with LP value " +
                                                   std::to_string(j_lp));
  detail::finish_region(cr, Y, opt);
  return cr;
}

// Intersection of regions that share a query point, with summed pieces.
inline CriticalRegion combine(const std::vector<CriticalRegion>& regions, const RegionOptions& opt = {}) {
  if (regions.empty()) throw SolverError("combine_empty", "combine needs at least one region");
  CriticalRegion out;
  out.alpha = Vec::Zero(regions.front().alpha.size());
  Polytope p{Mat(0, out.alpha.size()), Vec(0)};
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    out.alpha += r.alpha;
    out.beta += r.beta;
    p = stack(p, normalized(r.polytope()));
    if (i) out.active_fingerprint.push_back(-1);
    out.active_fingerprint.insert(out.active_fingerprint.end(), r.active_fingerprint.begin(),
                                  r.active_fingerprint.end());
  }
  if (opt.prune) p = remove_redundant(p, opt.tol_feas);
  if (chebyshev_ball(p).radius < -opt.tol_feas)
    throw SolverError("combine_empty", "regions do not intersect");
  out.D = std::move(p.A);
  out.d = std::move(p.b);
  return out;
}

struct MaxRegion {
  CriticalRegion region;
  int argmax = 0;  // index into the vertex set
};

// Affine piece of F(z) = max_k J*(z, V[k]) containing y.
inline MaxRegion max_over_vertices_region(const AreaModel& area, const CouplingPolytope& Y, const Vec& y,
                                          const std::vector<Vec>& V, const RegionOptions& opt = {}) {
  if (V.empty()) throw SolverError("empty_vertex_set", "max over an empty vertex set");
  RegionOptions inner = opt;
  inner.prune = false;
  std::vector<CriticalRegion> pieces;
  pieces.reserve(V.size());
  for (const Vec& xi : V) pieces.push_back(area_region(area, Y, y, xi, inner));
  if (V.size() == 1) {
    MaxRegion out{pieces.front(), 0};
    if (opt.prune) {
      Polytope p = remove_redundant(out.region.polytope(), opt.tol_feas);
      out.region.D = std::move(p.A);
      out.region.d = std::move(p.b);
    }
    return out;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& pc : pieces) best = std::max(best, pc.value(y));
  int k_star = 0;
  for (std::size_t k = 0; k < pieces.size(); ++k)
    if (pieces[k].value(y) >= best - opt.tol_opt * (1.0 + std::abs(best))) {
      k_star = static_cast<int>(k);
      break;
    }
  const CriticalRegion& top = pieces[static_cast<std::size_t>(k_star)];
  Polytope p{Mat(0, y.size()), Vec(0)};
  for (const auto& pc : pieces) p = stack(p, pc.polytope());
  Polytope dom{Mat(static_cast<Eigen::Index>(pieces.size()), y.size()), Vec(static_cast<Eigen::Index>(pieces.size()))};
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    dom.A.row(static_cast<Eigen::Index>(k)) = (pieces[k].alpha - top.alpha).transpose();
    dom.b(static_cast<Eigen::Index>(k)) = top.beta - pieces[k].beta;
  }
  p = stack(p, normalized(dom));
  if (opt.prune) p = remove_redundant(p, opt.tol_feas);
  MaxRegion out;
  out.argmax = k_star;
  out.region.D = std::move(p.A);
  out.region.d = std::move(p.b);
  out.region.alpha = top.alpha;
  out.region.beta = top.beta;
  out.region.active_fingerprint = top.active_fingerprint;
  out.region.active_fingerprint.insert(out.region.active_fingerprint.begin(), {-2, k_star, -2});
  return out;
}

}  // namespace tieline
