#pragma once

// Minimum-norm point of conv(alphas) + cone(generators).
//
// Wolfe's corral method, extended with rays: the corral holds points (whose
// weights sum to one) and rays (whose weights are only nonnegative). Each
// major step adds the atom that most violates the optimality conditions
//   alpha_j'v >= |v|^2  for every point,   g_k'v >= 0  for every ray,
// and minor steps keep the weights feasible by moving back along the segment
// to the affine minimizer of the corral.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tieline/error.hpp"
#include "tieline/lp.hpp"
#include "tieline/polytope.hpp"

namespace tieline {

struct DirectionResult {
  Vec v;
  Vec eta;  // convex weights on the alphas
  Vec mu;   // nonnegative weights on the generators
  bool zero = false;       // v treated as 0 under the normalized threshold
  double residual = 0.0;   // worst optimality violation, relative to the largest alpha
  int iterations = 0;
};

// Outward normals of the rows of P active at y, scaled to unit length.
inline std::vector<Vec> normal_cone(const Polytope& P, const Vec& y, double tol_feas) {
  std::vector<Vec> gens;
  for (Eigen::Index r = 0; r < P.rows(); ++r) {
    const double nrm = P.A.row(r).norm();
    if (nrm == 0.0) continue;
    if (std::abs(P.A.row(r).dot(y) - P.b(r)) <= tol_feas * std::max(1.0, nrm)) gens.push_back(P.A.row(r) / nrm);
  }
  return gens;
}

inline DirectionResult min_norm_direction(const std::vector<Vec>& alphas_in, const std::vector<Vec>& gens_in,
                                          double tol_v = 1e-7, int max_iters = 1000) {
  if (alphas_in.empty()) throw SolverError("direction_empty", "min-norm direction needs at least one subgradient");
  const Eigen::Index dim = alphas_in.front().size();
  // Work on points scaled to at most unit norm and unit rays; the min-norm
  // point scales with the points and the cone is unchanged.
  double amax = 0.0;
  for (const Vec& a : alphas_in) amax = std::max(amax, a.norm());
  const double unit = amax > 0.0 ? amax : 1.0;
  std::vector<Vec> alphas, gens;
  for (const Vec& a : alphas_in) alphas.push_back(a / unit);
  std::vector<double> gen_norm;
  for (const Vec& g : gens_in) {
    gen_norm.push_back(g.norm());
    if (gen_norm.back() == 0.0) throw SolverError("direction_qp", "zero cone generator");
    gens.push_back(g / gen_norm.back());
  }
  const int np = static_cast<int>(alphas.size());
  const int na = np + static_cast<int>(gens.size());
  auto atom = [&](int k) -> const Vec& { return k < np ? alphas[k] : gens[static_cast<std::size_t>(k - np)]; };
  const double tol = 1e-13;

  std::vector<int> corral;
  std::vector<double> weight;
  {
    int best = 0;
    for (int j = 1; j < np; ++j)
      if (alphas[j].squaredNorm() < alphas[best].squaredNorm()) best = j;
    corral.push_back(best);
    weight.push_back(1.0);
  }
  auto current = [&] {
    Vec x = Vec::Zero(dim);
    for (std::size_t s = 0; s < corral.size(); ++s) x += weight[s] * atom(corral[s]);
    return x;
  };
  Vec x = current();
  int it = 0;
  for (; it < max_iters; ++it) {
    const double xx = x.squaredNorm();
    int enter = -1;
    double worst = -tol;
    for (int k = 0; k < na; ++k) {
      if (std::find(corral.begin(), corral.end(), k) != corral.end()) continue;
      const double score = k < np ? atom(k).dot(x) - xx : atom(k).dot(x);
      if (score < worst) {
        worst = score;
        enter = k;
      }
    }
    if (enter < 0) break;
    corral.push_back(enter);
    weight.push_back(0.0);
    for (int minor = 0; minor < 10 * na + 10; ++minor) {
      // Affine minimizer: min |B c|^2 subject to sum of point weights = 1.
      const auto s = static_cast<Eigen::Index>(corral.size());
      Mat K = Mat::Zero(s + 1, s + 1);
      Mat B(dim, s);
      for (Eigen::Index i = 0; i < s; ++i) B.col(i) = atom(corral[static_cast<std::size_t>(i)]);
      K.topLeftCorner(s, s) = B.transpose() * B;
      for (Eigen::Index i = 0; i < s; ++i) {
        const double e = corral[static_cast<std::size_t>(i)] < np ? 1.0 : 0.0;
        K(i, s) = e;
        K(s, i) = e;
      }
      Vec rhs = Vec::Zero(s + 1);
      rhs(s) = 1.0;
      Eigen::FullPivLU<Mat> lu(K);
      const Vec sol = lu.isInvertible() ? Vec(lu.solve(rhs)) : Vec(K.completeOrthogonalDecomposition().solve(rhs));
      const Vec c = sol.head(s);
      bool interior = true;
      for (Eigen::Index i = 0; i < s; ++i)
        if (c(i) <= 1e-14) interior = false;
      if (interior) {
        for (Eigen::Index i = 0; i < s; ++i) weight[static_cast<std::size_t>(i)] = c(i);
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < s; ++i) {
        const double w = weight[static_cast<std::size_t>(i)];
        if (c(i) <= 1e-14 && w - c(i) > 0) theta = std::min(theta, w / (w - c(i)));
      }
      for (Eigen::Index i = 0; i < s; ++i) {
        double& w = weight[static_cast<std::size_t>(i)];
        w = theta * c(i) + (1.0 - theta) * w;
      }
      // Drop atoms whose weight reached zero, keeping at least one point.
      std::vector<int> keep_c;
      std::vector<double> keep_w;
      for (std::size_t i = 0; i < corral.size(); ++i)
        if (weight[i] > 1e-14) {
          keep_c.push_back(corral[i]);
          keep_w.push_back(weight[i]);
        }
      corral = std::move(keep_c);
      weight = std::move(keep_w);
      double psum = 0.0;
      for (std::size_t i = 0; i < corral.size(); ++i)
        if (corral[i] < np) psum += weight[i];
      if (psum <= 0.0) throw SolverError("direction_qp", "corral lost all points");
      for (std::size_t i = 0; i < corral.size(); ++i)
        if (corral[i] < np) weight[i] /= psum;
    }
    const Vec nx = current();
    if (nx.squaredNorm() >= xx - tol && it > 0 && (nx - x).norm() <= 1e-15) {
      x = nx;
      break;
    }
    x = nx;
  }
  if (it == max_iters) throw SolverError("direction_qp", "min-norm iteration cap reached");

  DirectionResult out;
  out.iterations = it;
  out.eta = Vec::Zero(np);
  out.mu = Vec::Zero(static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < corral.size(); ++i) {
    if (corral[i] < np) out.eta(corral[i]) = weight[i];
    else out.mu(corral[i] - np) = weight[i] * unit / gen_norm[static_cast<std::size_t>(corral[i] - np)];
  }
  const double xx = x.squaredNorm();
  for (int k = 0; k < na; ++k) {
    const double score = k < np ? atom(k).dot(x) - xx : atom(k).dot(x);
    out.residual = std::max(out.residual, -score);
  }
  out.v = x * unit;
  out.zero = out.v.norm() / (1.0 + amax) <= tol_v;
  return out;
}

}  // namespace tieline
