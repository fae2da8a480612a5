#pragma once

// Small dense H-polytope utilities: {z : A z <= b}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tieline/error.hpp"
#include "tieline/lp.hpp"
#include "tieline/rng.hpp"

namespace tieline {

struct Polytope {
  Mat A;
  Vec b;

  Eigen::Index dim() const { return A.cols(); }
  Eigen::Index rows() const { return A.rows(); }

  bool contains(const Vec& z, double tol) const {
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      const double scale = std::max(1.0, A.row(r).lpNorm<Eigen::Infinity>());
      if (A.row(r).dot(z) - b(r) > tol * scale) return false;
    }
    return true;
  }
};

inline Polytope stack(const Polytope& p, const Polytope& q) {
  Polytope out;
  out.A.resize(p.rows() + q.rows(), std::max(p.dim(), q.dim()));
  out.b.resize(p.rows() + q.rows());
  if (p.rows()) out.A.topRows(p.rows()) = p.A;
  if (q.rows()) out.A.bottomRows(q.rows()) = q.A;
  out.b << p.b, q.b;
  return out;
}

// Drops zero rows that hold trivially and scales every row to unit 2-norm.
inline Polytope normalized(const Polytope& p, double tol = 1e-12) {
  std::vector<Eigen::Index> keep;
  Vec norms(p.rows());
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    norms(r) = p.A.row(r).norm();
    if (norms(r) > tol) keep.push_back(r);
  }
  Polytope out;
  out.A.resize(static_cast<Eigen::Index>(keep.size()), p.dim());
  out.b.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto r = keep[i];
    out.A.row(static_cast<Eigen::Index>(i)) = p.A.row(r) / norms(r);
    out.b(static_cast<Eigen::Index>(i)) = p.b(r) / norms(r);
  }
  return out;
}

// Removes rows implied by the others: a row is kept only when maximizing it
// over the remaining (kept and not yet visited) rows exceeds its bound by
// more than tol. Rows are assumed normalized. Exact duplicates keep the
// first copy.
inline Polytope remove_redundant(const Polytope& p, double tol = 1e-9) {
  const Eigen::Index m = p.rows();
  std::vector<char> alive(static_cast<std::size_t>(m), 1);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index s = 0; s < r; ++s)
      if (alive[s] && (p.A.row(r) - p.A.row(s)).lpNorm<Eigen::Infinity>() <= 1e-12) {
        if (p.b(r) >= p.b(s)) {
          alive[r] = 0;
          break;
        }
        alive[s] = 0;
      }
  for (Eigen::Index r = m - 1; r >= 0; --r) {
    if (!alive[r]) continue;
    LpProblem lp;
    lp.c = -p.A.row(r).transpose();
    std::vector<Eigen::Index> others;
    for (Eigen::Index s = 0; s < m; ++s)
      if (s != r && alive[s]) others.push_back(s);
    lp.A.resize(static_cast<Eigen::Index>(others.size()) + 1, p.dim());
    lp.b.resize(static_cast<Eigen::Index>(others.size()) + 1);
    for (std::size_t i = 0; i < others.size(); ++i) {
      lp.A.row(static_cast<Eigen::Index>(i)) = p.A.row(others[i]);
      lp.b(static_cast<Eigen::Index>(i)) = p.b(others[i]);
    }
    // Relax the row itself slightly so the LP stays bounded in directions
    // only this row closes.
    lp.A.row(static_cast<Eigen::Index>(others.size())) = p.A.row(r);
    lp.b(static_cast<Eigen::Index>(others.size())) = p.b(r) + 1.0;
    const LpSolution s = solve(lp);
    if (s.optimal() && -s.value <= p.b(r) + tol) alive[r] = 0;
  }
  Polytope out;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < m; ++r)
    if (alive[r]) keep.push_back(r);
  out.A.resize(static_cast<Eigen::Index>(keep.size()), p.dim());
  out.b.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.A.row(static_cast<Eigen::Index>(i)) = p.A.row(keep[i]);
    out.b(static_cast<Eigen::Index>(i)) = p.b(keep[i]);
  }
  return out;
}

struct Ball {
  Vec center;
  double radius = -1.0;  // negative when the polytope is empty
};

// Largest inscribed ball; radius is capped at 1e6.
inline Ball chebyshev_ball(const Polytope& p) {
  const Eigen::Index n = p.dim();
  LpProblem lp;
  lp.c = Vec::Zero(n + 1);
  lp.c(n) = -1.0;
  lp.A = Mat::Zero(p.rows() + 2, n + 1);
  lp.b = Vec::Zero(p.rows() + 2);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    lp.A.row(r).head(n) = p.A.row(r);
    lp.A(r, n) = p.A.row(r).norm();
    lp.b(r) = p.b(r);
  }
  lp.A(p.rows(), n) = 1.0;
  lp.b(p.rows()) = 1e6;
  lp.A(p.rows() + 1, n) = -1.0;
  lp.b(p.rows() + 1) = 1.0;  // radius >= -1 keeps the LP bounded when empty
  const LpSolution s = solve(lp);
  Ball out;
  if (!s.optimal()) return out;
  out.center = s.z.head(n);
  out.radius = s.z(n);
  return out;
}

// Hit-and-run samples started from `start`, which must be inside. Directions
// are drawn uniformly on the sphere; chords are computed exactly from the
// rows. When the polytope is flat at `start` the samples collapse onto it.
inline std::vector<Vec> hit_and_run(const Polytope& p, const Vec& start, int count, Rng& rng, int thin = 5) {
  std::vector<Vec> out;
  Vec z = start;
  const Eigen::Index n = p.dim();
  for (int k = 0; k < count * thin; ++k) {
    Vec u(n);
    for (Eigen::Index j = 0; j < n; ++j) u(j) = rng.normal();
    const double un = u.norm();
    if (un == 0.0) continue;
    u /= un;
    double t_lo = -1e300, t_hi = 1e300;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double a = p.A.row(r).dot(u);
      const double slack = std::max(0.0, p.b(r) - p.A.row(r).dot(z));
      if (a > 1e-14) t_hi = std::min(t_hi, slack / a);
      else if (a < -1e-14) t_lo = std::max(t_lo, slack / a);
    }
    if (t_lo > t_hi || t_lo < -1e299 || t_hi > 1e299) t_lo = t_hi = 0.0;
    z += rng.uniform(t_lo, t_hi) * u;
    if ((k + 1) % thin == 0) out.push_back(z);
  }
  return out;
}

// Euclidean projection of `target` onto the polytope by a primal active-set
// method started from the feasible point `start`.
inline Vec project(const Polytope& p, const Vec& target, const Vec& start, double tol = 1e-12) {
  const Eigen::Index n = p.dim();
  Vec z = start;
  std::vector<Eigen::Index> work;
  auto working_matrix = [&] {
    Mat W(static_cast<Eigen::Index>(work.size()), n);
    for (std::size_t i = 0; i < work.size(); ++i) W.row(static_cast<Eigen::Index>(i)) = p.A.row(work[i]);
    return W;
  };
  // Independent subset of the rows active at the start.
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    if (p.b(r) - p.A.row(r).dot(z) > tol * std::max(1.0, p.A.row(r).norm())) continue;
    work.push_back(r);
    Eigen::FullPivLU<Mat> lu(working_matrix());
    if (lu.rank() < static_cast<Eigen::Index>(work.size())) work.pop_back();
  }
  for (int it = 0; it < 1000; ++it) {
    const Mat W = working_matrix();
    const Vec g = target - z;
    Vec step = g;
    Vec lambda;
    if (W.rows()) {
      const Mat WWt = W * W.transpose();
      lambda = WWt.ldlt().solve(W * g);
      step = g - W.transpose() * lambda;
    }
    if (step.norm() <= tol * std::max(1.0, g.norm())) {
      if (!W.rows() || lambda.minCoeff() >= -tol) return z;
      Eigen::Index drop;
      lambda.minCoeff(&drop);
      work.erase(work.begin() + drop);
      continue;
    }
    double t = 1.0;
    Eigen::Index block = -1;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      if (std::find(work.begin(), work.end(), r) != work.end()) continue;
      const double a = p.A.row(r).dot(step);
      if (a <= tol * p.A.row(r).norm() * step.norm()) continue;
      const double room = std::max(0.0, p.b(r) - p.A.row(r).dot(z)) / a;
      if (room < t) {
        t = room;
        block = r;
      }
    }
    z += t * step;
    if (block >= 0) work.push_back(block);
  }
  throw SolverError("projection", "projection onto polytope did not converge");
}

// Calls fn for every k-subset of {0..m-1} in lexicographic order.
inline void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
  if (k > m) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// All vertices by brute force over row subsets; intended for dimension <= 8
// and a few dozen rows. Duplicate vertices are merged.
inline std::vector<Vec> enumerate_vertices(const Polytope& p, double tol = 1e-9) {
  const int n = static_cast<int>(p.dim());
  const int m = static_cast<int>(p.rows());
  std::vector<Vec> verts;
  if (n == 0) {
    verts.push_back(Vec(0));
    return verts;
  }
  Mat M(n, n);
  Vec r(n);
  for_each_subset(m, n, [&](const std::vector<int>& idx) {
    for (int i = 0; i < n; ++i) {
      M.row(i) = p.A.row(idx[i]);
      r(i) = p.b(idx[i]);
    }
    Eigen::FullPivLU<Mat> lu(M);
    if (lu.rank() < n) return;
    const Vec v = lu.solve(r);
    if (!p.contains(v, tol)) return;
    for (const Vec& w : verts)
      if ((w - v).lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + v.lpNorm<Eigen::Infinity>())) return;
    verts.push_back(v);
  });
  return verts;
}

}  // namespace tieline
