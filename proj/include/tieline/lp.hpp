#pragma once

// Dense linear programming:
//
//     minimize  c'z   subject to   A z <= b   (rows may be flagged as equalities)
//
// z is free unless rows bound it. The solver is a bounded-variable primal
// simplex on a dense tableau. Before pivoting, rows are scaled to unit
// inf-norm, single-variable rows become variable bounds, and pairs of rows
// with exactly negated coefficient vectors collapse into one ranged row. The
// multipliers, active set and defining rows reported back always refer to
// the caller's original rows.
//
// Pricing is Dantzig's rule with Bland's rule taking over after a run of
// degenerate pivots, so results are deterministic and cycling cannot occur.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "tieline/error.hpp"

namespace tieline {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct LpProblem {
  Vec c;
  Mat A;
  Vec b;
  // Either empty or one flag per row; a flagged row is met with equality.
  std::vector<char> equality;

  Eigen::Index vars() const { return c.size(); }
  Eigen::Index rows() const { return A.rows(); }
  bool is_equality(Eigen::Index r) const {
    return !equality.empty() && equality[static_cast<std::size_t>(r)] != 0;
  }

  // Appends a row a'z <= rhs (or == rhs) and returns its index.
  Eigen::Index add_row(const Vec& a, double rhs, bool eq = false) {
    const Eigen::Index r = A.rows();
    if (A.cols() == 0 && r == 0) A.resize(0, c.size());
    A.conservativeResize(r + 1, Eigen::NoChange);
    A.row(r) = a.transpose();
    b.conservativeResize(r + 1);
    b(r) = rhs;
    if (eq || !equality.empty()) {
      equality.resize(static_cast<std::size_t>(r), 0);
      equality.push_back(eq ? 1 : 0);
    }
    return r;
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct LpOptions {
  // Absolute feasibility tolerance on inf-norm scaled rows.
  double tol_feas = 1e-9;
  // Relative optimality tolerance (reduced costs, objective fixing in the
  // lexicographic passes).
  double tol_opt = 1e-9;
  int max_pivots = 500000;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vec z;
  double value = 0.0;
  // One nonnegative multiplier per row (signed for equality rows), such that
  // c + A'duals = 0 at an optimum.
  Vec duals;
  // Rows with |A_j z - b_j| <= tol_feas after scaling, ascending.
  std::vector<int> active_set;
  // Rows that pin down the optimal vertex: the rows whose slacks (or bound
  // rows whose variables) are nonbasic in the final basis, ascending.
  std::vector<int> basis_rows;
  int pivots = 0;

  bool optimal() const { return status == LpStatus::optimal; }
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Problem after scaling, bound extraction and pair merging.
struct Standardized {
  int n = 0;
  Vec lo, hi;
  std::vector<int> lo_row, hi_row;  // original row behind each bound, or -1

  // General constraints: a_k z + s_k = ub_k with 0 <= s_k <= range_k.
  Mat A;
  Vec ub, range;
  std::vector<int> up_row, dn_row;  // dn_row == up_row for equality rows

  Vec scale;  // inf-norm of each original row (1 for zero rows)
  bool infeasible = false;
};

inline Standardized standardize(const LpProblem& p, double tol) {
  Standardized s;
  const int n = static_cast<int>(p.vars());
  const int m = static_cast<int>(p.rows());
  s.n = n;
  s.lo = Vec::Constant(n, -kInf);
  s.hi = Vec::Constant(n, kInf);
  s.lo_row.assign(n, -1);
  s.hi_row.assign(n, -1);
  s.scale = Vec::Ones(m);

  Mat scaled(m, n);
  Vec rhs(m);
  std::vector<int> nnz(m, 0), single(m, -1);
  for (int r = 0; r < m; ++r) {
    double norm = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = p.A(r, j);
      if (!std::isfinite(a) || !std::isfinite(p.b(r)))
        throw InputError("lp_nonfinite", "non-finite coefficient in row " + std::to_string(r));
      if (a != 0.0) {
        ++nnz[r];
        single[r] = j;
        norm = std::max(norm, std::abs(a));
      }
    }
    if (norm > 0.0) s.scale(r) = norm;
    for (int j = 0; j < n; ++j) {
      const double v = p.A(r, j) / s.scale(r);
      scaled(r, j) = (v == 0.0) ? 0.0 : v;  // fold -0.0 into +0.0 for pairing keys
    }
    rhs(r) = p.b(r) / s.scale(r);
  }

  auto tighten_hi = [&](int j, double v, int r) {
    if (v < s.hi(j)) {
      s.hi(j) = v;
      s.hi_row[j] = r;
    }
  };
  auto tighten_lo = [&](int j, double v, int r) {
    if (v > s.lo(j)) {
      s.lo(j) = v;
      s.lo_row[j] = r;
    }
  };

  struct Pending {
    std::vector<int> pos, neg;
  };
  std::map<std::vector<double>, Pending> groups;
  std::vector<std::vector<double>> keys(m);
  std::vector<int> sign(m, 1);
  std::vector<int> general;

  for (int r = 0; r < m; ++r) {
    if (nnz[r] == 0) {
      if (rhs(r) < -tol || (p.is_equality(r) && rhs(r) > tol)) s.infeasible = true;
      continue;
    }
    if (nnz[r] == 1) {
      const int j = single[r];
      const double a = scaled(r, j);
      const double v = rhs(r) / a;
      if (p.is_equality(r)) {
        tighten_hi(j, v, r);
        tighten_lo(j, v, r);
      } else if (a > 0) {
        tighten_hi(j, v, r);
      } else {
        tighten_lo(j, v, r);
      }
      continue;
    }
    general.push_back(r);
    std::vector<double> key(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) key[j] = scaled(r, j);
    const auto first = std::find_if(key.begin(), key.end(), [](double v) { return v != 0.0; });
    if (*first < 0) {
      sign[r] = -1;
      for (double& v : key) v = (v == 0.0) ? 0.0 : -v;
    }
    keys[r] = std::move(key);
  }

  for (int j = 0; j < n; ++j) {
    if (s.lo(j) > s.hi(j)) {
      if (s.lo(j) - s.hi(j) > tol * std::max(1.0, std::abs(s.hi(j)))) {
        s.infeasible = true;
      } else {
        s.lo(j) = s.hi(j);
      }
    }
  }

  // Pair rows in index order; the earlier row of each pair defines the
  // constraint direction.
  std::vector<char> used(m, 0);
  for (int r : general) {
    if (p.is_equality(r)) continue;
    auto& g = groups[keys[r]];
    (sign[r] > 0 ? g.pos : g.neg).push_back(r);
  }
  std::map<int, int> partner;
  for (auto& [key, g] : groups) {
    const std::size_t k = std::min(g.pos.size(), g.neg.size());
    for (std::size_t i = 0; i < k; ++i) {
      const int a = std::min(g.pos[i], g.neg[i]);
      const int b = std::max(g.pos[i], g.neg[i]);
      partner[a] = b;
      used[b] = 1;
    }
  }

  std::vector<int> order;
  for (int r : general)
    if (!used[r]) order.push_back(r);
  const int K = static_cast<int>(order.size());
  s.A.resize(K, n);
  s.ub.resize(K);
  s.range.resize(K);
  s.up_row.resize(K);
  s.dn_row.resize(K);
  for (int k = 0; k < K; ++k) {
    const int r = order[k];
    s.A.row(k) = scaled.row(r);
    s.ub(k) = rhs(r);
    s.up_row[k] = r;
    if (p.is_equality(r)) {
      s.range(k) = 0.0;
      s.dn_row[k] = r;
    } else if (auto it = partner.find(r); it != partner.end()) {
      const double range = rhs(r) + rhs(it->second);
      s.dn_row[k] = it->second;
      if (range < -tol) s.infeasible = true;
      s.range(k) = std::max(range, 0.0);
      if (s.range(k) <= tol) s.range(k) = 0.0;
    } else {
      s.range(k) = kInf;
      s.dn_row[k] = -1;
    }
  }
  return s;
}

enum class VarState : std::uint8_t { basic, at_lo, at_hi, free_zero };

class Simplex {
 public:
  Simplex(const Standardized& s, const Vec& c, const LpOptions& opt)
      : s_(s), opt_(opt), n_(s.n), K_(static_cast<int>(s.A.rows())) {
    cost_scale_ = std::max(1.0, c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0);
    c_struct_ = c;
  }

  LpSolution run() {
    LpSolution out;
    init();
    // Phase 1.
    Vec c1 = Vec::Zero(ncols_);
    for (int j = n_ + K_; j < ncols_; ++j) c1(j) = 1.0;
    compute_reduced(c1);
    if (!iterate(c1, /*phase_one=*/true)) {
      throw SolverError("lp_phase1", "phase one reported unbounded");
    }
    double infeas = 0.0;
    for (int i = 0; i < K_; ++i)
      if (basis_[i] >= n_ + K_) infeas += xb_(i);
    for (int j = n_ + K_; j < ncols_; ++j)
      if (state_[j] != VarState::basic) infeas += x_(j);
    if (infeas > 10 * opt_.tol_feas * std::max(1, K_)) {
      out.status = LpStatus::infeasible;
      out.pivots = pivots_;
      return out;
    }
    drive_out_artificials();
    for (int j = n_ + K_; j < ncols_; ++j) {
      lo_(j) = 0.0;
      hi_(j) = 0.0;
      if (state_[j] != VarState::basic) {
        x_(j) = 0.0;
        state_[j] = VarState::at_lo;
      }
    }
    // Phase 2.
    Vec c2 = Vec::Zero(ncols_);
    c2.head(n_) = c_struct_;
    compute_reduced(c2);
    if (!iterate(c2, /*phase_one=*/false)) {
      out.status = LpStatus::unbounded;
      out.pivots = pivots_;
      return out;
    }
    drive_out_fixed();
    pivot_in_free(c2);
    polish(c2);
    out.status = LpStatus::optimal;
    out.pivots = pivots_;
    return out;
  }

  Vec structural() const {
    Vec z(n_);
    for (int j = 0; j < n_; ++j) z(j) = value(j);
    return z;
  }
  double value(int j) const { return state_[j] == VarState::basic ? xb_(row_of_[j]) : x_(j); }
  double reduced(int j) const { return d_(j); }
  VarState state(int j) const { return state_[j]; }
  int n() const { return n_; }
  int K() const { return K_; }

 private:
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  double col_entry(int j, int row) const {
    if (j < n_) return s_.A(row, j);
    if (j < n_ + K_) return (j - n_ == row) ? 1.0 : 0.0;
    const int a = j - n_ - K_;
    return art_row_[a] == row ? art_sign_[a] : 0.0;
  }

  void init() {
    const int nart_max = K_;
    ncols_ = n_ + K_;
    lo_ = Vec::Zero(n_ + K_ + nart_max);
    hi_ = Vec::Zero(n_ + K_ + nart_max);
    x_ = Vec::Zero(n_ + K_ + nart_max);
    state_.assign(n_ + K_ + nart_max, VarState::at_lo);
    for (int j = 0; j < n_; ++j) {
      lo_(j) = s_.lo(j);
      hi_(j) = s_.hi(j);
      if (std::isfinite(lo_(j))) {
        x_(j) = lo_(j);
        state_[j] = VarState::at_lo;
      } else if (std::isfinite(hi_(j))) {
        x_(j) = hi_(j);
        state_[j] = VarState::at_hi;
      } else {
        x_(j) = 0.0;
        state_[j] = VarState::free_zero;
      }
    }
    for (int k = 0; k < K_; ++k) {
      lo_(n_ + k) = 0.0;
      hi_(n_ + k) = s_.range(k);
    }
    basis_.assign(K_, -1);
    xb_ = Vec::Zero(K_);
    T_ = RowMat::Zero(K_, n_ + K_ + nart_max);
    const Vec resid = s_.ub - s_.A * x_.head(n_);
    for (int k = 0; k < K_; ++k) {
      const double r = resid(k);
      const int sj = n_ + k;
      if (r >= -opt_.tol_feas && r <= s_.range(k) + opt_.tol_feas) {
        basis_[k] = sj;
        state_[sj] = VarState::basic;
        xb_(k) = std::clamp(r, 0.0, s_.range(k));
        T_.row(k).head(n_) = s_.A.row(k);
        T_(k, sj) = 1.0;
        continue;
      }
      const double sv = (r < 0.0) ? 0.0 : s_.range(k);
      x_(sj) = sv;
      state_[sj] = (r < 0.0) ? VarState::at_lo : VarState::at_hi;
      const double sign = (r - sv) >= 0.0 ? 1.0 : -1.0;
      const int aj = ncols_++;
      art_row_.push_back(k);
      art_sign_.push_back(sign);
      lo_(aj) = 0.0;
      hi_(aj) = kInf;
      basis_[k] = aj;
      state_[aj] = VarState::basic;
      xb_(k) = std::abs(r - sv);
      T_.row(k).head(n_) = s_.A.row(k) / sign;
      T_(k, sj) = 1.0 / sign;
      T_(k, aj) = 1.0;
    }
    T_.conservativeResize(Eigen::NoChange, ncols_);
    lo_.conservativeResize(ncols_);
    hi_.conservativeResize(ncols_);
    x_.conservativeResize(ncols_);
    state_.resize(ncols_);
    row_of_.assign(ncols_, -1);
    for (int i = 0; i < K_; ++i) row_of_[basis_[i]] = i;
  }

  void compute_reduced(const Vec& cost) {
    Vec cb(K_);
    for (int i = 0; i < K_; ++i) cb(i) = cost(basis_[i]);
    d_ = cost;
    if (K_ > 0) d_.noalias() -= (cb.transpose() * T_).transpose();
    for (int i = 0; i < K_; ++i) d_(basis_[i]) = 0.0;
  }

  bool eligible(int j, double tol, int& dir) const {
    if (state_[j] == VarState::basic) return false;
    if (lo_(j) == hi_(j)) return false;
    const double d = d_(j);
    switch (state_[j]) {
      case VarState::at_lo:
        if (d < -tol) { dir = 1; return true; }
        return false;
      case VarState::at_hi:
        if (d > tol) { dir = -1; return true; }
        return false;
      case VarState::free_zero:
        if (d < -tol) { dir = 1; return true; }
        if (d > tol) { dir = -1; return true; }
        return false;
      default:
        return false;
    }
  }

  // Returns false when the objective is unbounded along an entering column.
  bool iterate(const Vec& cost, bool phase_one) {
    const double dtol = opt_.tol_opt * (phase_one ? 1.0 : cost_scale_);
    int degenerate_run = 0;
    bool bland = false;
    int since_refresh = 0;
    for (;;) {
      if (pivots_ >= opt_.max_pivots)
        throw SolverError("lp_pivot_cap", "simplex exceeded " + std::to_string(opt_.max_pivots) + " pivots");
      int q = -1, dir = 0;
      double best = 0.0;
      for (int j = 0; j < ncols_; ++j) {
        int dj = 0;
        if (!eligible(j, dtol, dj)) continue;
        if (bland) {
          q = j;
          dir = dj;
          break;
        }
        if (std::abs(d_(j)) > best) {
          best = std::abs(d_(j));
          q = j;
          dir = dj;
        }
      }
      if (q < 0) {
        // Confirm optimality against freshly computed reduced costs before
        // stopping; accumulated drift can hide or fake eligible columns.
        if (since_refresh == 0) return true;
        compute_reduced(cost);
        since_refresh = 0;
        continue;
      }

      constexpr double piv_tol = 1e-9;
      double t_best = (std::isfinite(lo_(q)) && std::isfinite(hi_(q))) ? hi_(q) - lo_(q) : kInf;
      int r = -1;
      double r_alpha = 0.0;
      for (int i = 0; i < K_; ++i) {
        const double alpha = dir * T_(i, q);
        if (std::abs(alpha) <= piv_tol) continue;
        const int bv = basis_[i];
        double t;
        if (alpha > 0) {
          if (!std::isfinite(lo_(bv))) continue;
          t = std::max(0.0, xb_(i) - lo_(bv)) / alpha;
        } else {
          if (!std::isfinite(hi_(bv))) continue;
          t = std::max(0.0, hi_(bv) - xb_(i)) / (-alpha);
        }
        const double gap = 1e-12 * std::max(1.0, t);
        bool take = false;
        if (t < t_best - gap) {
          take = true;
        } else if (t <= t_best + gap) {
          // Prefer a pivot over a bound flip; among pivots apply the rule.
          take = (r < 0) || (bland ? (bv < basis_[r]) : (std::abs(alpha) > std::abs(r_alpha)));
        }
        if (take) {
          t_best = t;
          r = i;
          r_alpha = alpha;
        }
      }
      if (r < 0 && !std::isfinite(t_best)) {
        // Confirm the ray on a tableau rebuilt from the basis; drift in the
        // updated tableau can hide the blocking row.
        if (pivots_ > refactored_at_) {
          refactor();
          compute_reduced(cost);
          since_refresh = 0;
          continue;
        }
        if (!phase_one) return false;
        // Phase one is bounded below, so the reduced cost itself is noise.
        d_(q) = 0.0;
        continue;
      }

      ++pivots_;
      ++since_refresh;
      const double t = t_best;
      if (K_ > 0) xb_.noalias() -= (dir * t) * T_.col(q);
      if (r < 0) {
        // Bound flip.
        if (dir > 0) {
          x_(q) = hi_(q);
          state_[q] = VarState::at_hi;
        } else {
          x_(q) = lo_(q);
          state_[q] = VarState::at_lo;
        }
      } else {
        const int leave = basis_[r];
        const double entering_value = x_(q) + dir * t;
        if (r_alpha > 0) {
          x_(leave) = lo_(leave);
          state_[leave] = VarState::at_lo;
        } else {
          x_(leave) = hi_(leave);
          state_[leave] = VarState::at_hi;
        }
        row_of_[leave] = -1;
        pivot(r, q);
        xb_(r) = entering_value;
      }
      if (t <= 1e-12) {
        if (++degenerate_run > 50) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (since_refresh >= 200) {
        compute_reduced(cost);
        since_refresh = 0;
      }
    }
  }

  // Rebuilds the tableau and basic values from the original columns.
  void refactor() {
    refactored_at_ = pivots_;
    if (K_ == 0) return;
    Mat full = Mat::Zero(K_, ncols_);
    full.leftCols(n_) = s_.A;
    full.block(0, n_, K_, K_).setIdentity();
    for (std::size_t a = 0; a < art_row_.size(); ++a) full(art_row_[a], n_ + K_ + static_cast<int>(a)) = art_sign_[a];
    Mat B(K_, K_);
    for (int i = 0; i < K_; ++i) B.col(i) = full.col(basis_[i]);
    const Eigen::FullPivLU<Mat> lu(B);
    if (!lu.isInvertible()) return;
    Vec rhs = s_.ub;
    for (int j = 0; j < ncols_; ++j)
      if (state_[j] != VarState::basic && x_(j) != 0.0) rhs -= x_(j) * full.col(j);
    T_ = lu.solve(full);
    for (int i = 0; i < K_; ++i) {
      T_.col(basis_[i]).setZero();
      T_(i, basis_[i]) = 1.0;
    }
    xb_ = lu.solve(rhs);
  }

  void pivot(int r, int q) {
    const double p = T_(r, q);
    T_.row(r) /= p;
    Vec colq = T_.col(q);
    colq(r) = 0.0;
    T_.noalias() -= colq * T_.row(r);
    T_.col(q).setZero();
    T_(r, q) = 1.0;
    const double dq = d_(q);
    d_.noalias() -= dq * T_.row(r).transpose();
    d_(q) = 0.0;
    basis_[r] = q;
    state_[q] = VarState::basic;
    row_of_[q] = r;
  }

  void drive_out_artificials() {
    for (int i = 0; i < K_; ++i) {
      if (basis_[i] < n_ + K_) continue;
      int best = -1;
      double mag = 1e-7;
      for (int j = 0; j < n_ + K_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (std::abs(T_(i, j)) > mag) {
          mag = std::abs(T_(i, j));
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; the artificial stays basic at zero
      const int leave = basis_[i];
      const double entering_value = x_(best);
      x_(leave) = 0.0;
      state_[leave] = VarState::at_lo;
      row_of_[leave] = -1;
      // The artificial is (numerically) zero, so this pivot does not move
      // any basic value beyond round-off.
      const double shift = xb_(i) / T_(i, best);
      if (K_ > 0) xb_.noalias() -= shift * T_.col(best);
      pivot(i, best);
      xb_(i) = entering_value + shift;
      ++pivots_;
    }
  }

  // Basic variables with lo == hi (equality slacks, fixed structurals) sit at
  // a degenerate value. Swap each for a nonbasic column chosen by a dual ratio
  // test so the basis stays optimal and both sides of the fixed row are not
  // reported as inactive.
  void drive_out_fixed() {
    for (int i = 0; i < K_; ++i) {
      const int bv = basis_[i];
      if (lo_(bv) != hi_(bv)) continue;
      double th_lo = -kInf, th_hi = kInf;
      for (int j = 0; j < ncols_; ++j) {
        if (state_[j] == VarState::basic || lo_(j) == hi_(j)) continue;
        const double a = T_(i, j);
        if (std::abs(a) <= 1e-9) continue;
        const double ratio = d_(j) / a;
        const bool upper = (state_[j] == VarState::at_lo) == (a > 0);
        if (state_[j] == VarState::free_zero) {
          th_lo = std::max(th_lo, std::min(ratio, 0.0));
          th_hi = std::min(th_hi, std::max(ratio, 0.0));
        } else if (upper) {
          th_hi = std::min(th_hi, ratio);
        } else {
          th_lo = std::max(th_lo, ratio);
        }
      }
      int q = -1;
      double q_abs = 0.0, q_theta = kInf;
      for (int j = 0; j < ncols_; ++j) {
        if (state_[j] == VarState::basic || lo_(j) == hi_(j)) continue;
        const double a = T_(i, j);
        if (std::abs(a) <= 1e-9) continue;
        const double ratio = d_(j) / a;
        const double slack = 1e-12 * std::max(1.0, std::abs(ratio));
        if (ratio < th_lo - slack || ratio > th_hi + slack) continue;
        const double th = std::abs(ratio);
        if (th < q_theta - 1e-15 || (th <= q_theta + 1e-15 && std::abs(a) > q_abs)) {
          q = j;
          q_abs = std::abs(a);
          q_theta = th;
        }
      }
      if (q < 0) continue;
      const double entering_value = x_(q);
      const double shift = (xb_(i) - lo_(bv)) / T_(i, q);
      x_(bv) = lo_(bv);
      state_[bv] = VarState::at_lo;
      row_of_[bv] = -1;
      if (K_ > 0) xb_.noalias() -= shift * T_.col(q);
      pivot(i, q);
      xb_(i) = entering_value + shift;
      ++pivots_;
    }
  }

  // Free structurals left nonbasic at zero have no bound to sit on; move them
  // into the basis along the optimal face where a blocking row exists.
  void pivot_in_free(const Vec& cost) {
    for (int q = 0; q < n_; ++q) {
      if (state_[q] != VarState::free_zero) continue;
      for (int dir : {1, -1}) {
        double t_best = kInf;
        int r = -1;
        double r_alpha = 0.0;
        for (int i = 0; i < K_; ++i) {
          const double alpha = dir * T_(i, q);
          if (std::abs(alpha) <= 1e-9) continue;
          const int bv = basis_[i];
          if (bv < n_ && !std::isfinite(lo_(bv)) && !std::isfinite(hi_(bv))) continue;
          double t;
          if (alpha > 0) {
            if (!std::isfinite(lo_(bv))) continue;
            t = std::max(0.0, xb_(i) - lo_(bv)) / alpha;
          } else {
            if (!std::isfinite(hi_(bv))) continue;
            t = std::max(0.0, hi_(bv) - xb_(i)) / (-alpha);
          }
          if (t < t_best - 1e-12 || (t <= t_best + 1e-12 && std::abs(alpha) > std::abs(r_alpha))) {
            t_best = t;
            r = i;
            r_alpha = alpha;
          }
        }
        if (r < 0) continue;
        xb_.noalias() -= (dir * t_best) * T_.col(q);
        const int leave = basis_[r];
        const double entering_value = x_(q) + dir * t_best;
        if (r_alpha > 0) {
          x_(leave) = lo_(leave);
          state_[leave] = VarState::at_lo;
        } else {
          x_(leave) = hi_(leave);
          state_[leave] = VarState::at_hi;
        }
        row_of_[leave] = -1;
        pivot(r, q);
        xb_(r) = entering_value;
        ++pivots_;
        break;
      }
    }
    compute_reduced(cost);
  }

  // Recomputes basic values and duals from a fresh factorization of the
  // final basis, removing drift accumulated in the tableau.
  void polish(const Vec& cost) {
    if (K_ == 0) {
      d_ = cost;
      return;
    }
    Mat B(K_, K_);
    for (int i = 0; i < K_; ++i)
      for (int r = 0; r < K_; ++r) B(r, i) = col_entry(basis_[i], r);
    Vec rhs = s_.ub;
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == VarState::basic || x_(j) == 0.0) continue;
      for (int r = 0; r < K_; ++r) {
        const double a = col_entry(j, r);
        if (a != 0.0) rhs(r) -= a * x_(j);
      }
    }
    Eigen::PartialPivLU<Mat> lu(B);
    const Vec xb = lu.solve(rhs);
    if (!xb.allFinite() || (B * xb - rhs).lpNorm<Eigen::Infinity>() > 1e-7 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
      return;  // keep tableau values
    }
    Vec cb(K_);
    for (int i = 0; i < K_; ++i) cb(i) = cost(basis_[i]);
    const Vec pi = lu.transpose().solve(cb);
    xb_ = xb;
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == VarState::basic) {
        d_(j) = 0.0;
        continue;
      }
      double dj = cost(j);
      for (int r = 0; r < K_; ++r) {
        const double a = col_entry(j, r);
        if (a != 0.0) dj -= pi(r) * a;
      }
      d_(j) = dj;
    }
  }

  const Standardized& s_;
  const LpOptions& opt_;
  int n_, K_;
  int ncols_ = 0;
  double cost_scale_ = 1.0;
  Vec c_struct_;
  RowMat T_;
  Vec xb_, x_, lo_, hi_, d_;
  std::vector<int> basis_, row_of_, art_row_;
  std::vector<double> art_sign_;
  std::vector<VarState> state_;
  int pivots_ = 0;
  int refactored_at_ = -1;
};

}  // namespace detail

inline LpSolution solve(const LpProblem& p, const LpOptions& opt = {}) {
  if (p.A.cols() != p.vars() && !(p.rows() == 0))
    throw InputError("lp_shape", "constraint matrix has wrong column count");
  if (p.b.size() != p.rows()) throw InputError("lp_shape", "rhs length differs from row count");
  LpSolution out;
  const detail::Standardized s = detail::standardize(p, opt.tol_feas);
  if (s.infeasible) {
    out.status = LpStatus::infeasible;
    return out;
  }
  detail::Simplex sx(s, p.c, opt);
  LpSolution run = sx.run();
  out.status = run.status;
  out.pivots = run.pivots;
  if (!out.optimal()) return out;

  const int n = static_cast<int>(p.vars());
  const int m = static_cast<int>(p.rows());
  out.z = sx.structural();
  out.value = p.c.dot(out.z);
  out.duals = Vec::Zero(m);

  const double dtol = opt.tol_opt * std::max(1.0, p.c.size() ? p.c.lpNorm<Eigen::Infinity>() : 0.0);
  std::vector<int> defining;
  for (int k = 0; k < sx.K(); ++k) {
    const int col = s.n + k;
    const double ds = sx.reduced(col);
    const int up = s.up_row[k], dn = s.dn_row[k];
    if (up == dn) {
      out.duals(up) = ds / s.scale(up);
    } else {
      if (ds > 0) out.duals(up) = ds / s.scale(up);
      if (ds < 0 && dn >= 0) out.duals(dn) = -ds / s.scale(dn);
    }
    switch (sx.state(col)) {
      case detail::VarState::at_lo: defining.push_back(up); break;
      case detail::VarState::at_hi: defining.push_back(dn >= 0 ? dn : up); break;
      default: break;
    }
  }
  for (int j = 0; j < n; ++j) {
    const double dj = sx.reduced(j);
    const auto st = sx.state(j);
    if (st == detail::VarState::basic || st == detail::VarState::free_zero) continue;
    const bool fixed = s.lo(j) == s.hi(j);
    int row = -1;
    if (fixed) {
      row = (dj > 0) ? s.lo_row[j] : s.hi_row[j];
      if (row < 0) row = (s.lo_row[j] >= 0) ? s.lo_row[j] : s.hi_row[j];
    } else {
      row = (st == detail::VarState::at_lo) ? s.lo_row[j] : s.hi_row[j];
    }
    if (row < 0) continue;
    defining.push_back(row);
    if (std::abs(dj) > 0.0) {
      const double lam = -dj / p.A(row, j);
      if (p.is_equality(row) || lam > 0) out.duals(row) = lam;
      else if (std::abs(dj) > dtol) {
        // Wrong-signed multiplier on the bound row: the bound on the other
        // side carries it.
        const int other = (row == s.lo_row[j]) ? s.hi_row[j] : s.lo_row[j];
        if (other >= 0) out.duals(other) = -dj / p.A(other, j);
      }
    }
  }
  std::sort(defining.begin(), defining.end());
  defining.erase(std::unique(defining.begin(), defining.end()), defining.end());
  out.basis_rows = std::move(defining);

  for (int r = 0; r < m; ++r) {
    const double resid = (p.A.row(r).dot(out.z) - p.b(r)) / s.scale(r);
    if (std::abs(resid) <= opt.tol_feas * 10) out.active_set.push_back(r);
  }
  return out;
}

// Among all optimal points, the lexicographically smallest one. Rows with a
// positive multiplier are turned into equalities, which by complementary
// slackness describes the optimal face exactly; z_1 is then minimized over
// the face and fixed, then z_2, and so on. Duals and basis rows come from the
// first solve.
inline LpSolution solve_lex_smallest(const LpProblem& p, const LpOptions& opt = {}) {
  LpSolution first = solve(p, opt);
  if (!first.optimal()) return first;
  LpProblem q = p;
  q.equality.assign(static_cast<std::size_t>(p.rows()), 0);
  const double dtol = opt.tol_opt * std::max(1.0, p.c.size() ? p.c.lpNorm<Eigen::Infinity>() : 0.0);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double scale = std::max(p.A.row(r).lpNorm<Eigen::Infinity>(), 1e-300);
    if (p.is_equality(r) || first.duals(r) * scale > dtol) q.equality[static_cast<std::size_t>(r)] = 1;
  }
  const Eigen::Index n = p.vars();
  LpSolution cur = first;
  for (Eigen::Index k = 0; k < n; ++k) {
    q.c = Vec::Zero(n);
    q.c(k) = 1.0;
    LpSolution s = solve(q, opt);
    if (!s.optimal())
      throw SolverError("lp_lex_pass", "lexicographic pass " + std::to_string(k) + " ended " + to_string(s.status));
    cur = s;
    Vec e = Vec::Zero(n);
    e(k) = 1.0;
    q.add_row(e, s.z(k), /*eq=*/true);
  }
  LpSolution out = first;
  out.z = cur.z;
  out.value = p.c.dot(out.z);
  out.active_set.clear();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double scale = std::max(p.A.row(r).lpNorm<Eigen::Infinity>(), 1e-300);
    if (std::abs(p.A.row(r).dot(out.z) - p.b(r)) / scale <= opt.tol_feas * 10)
      out.active_set.push_back(static_cast<int>(r));
  }
  return out;
}

}  // namespace tieline
