#include "tieline/lp.hpp"
#include "tieline/rng.hpp"

#include <catch_amalgamated.hpp>

#include "support/vertex_oracle.hpp"

using namespace tieline;
using Catch::Approx;

namespace {

LpProblem make(Vec c, Mat A, Vec b) {
  LpProblem p;
  p.c = std::move(c);
  p.A = std::move(A);
  p.b = std::move(b);
  return p;
}

// Random bounded, feasible LP: 11 random rows around an interior point plus
// one row that is minus their sum, so the normals positively span R^n.
LpProblem random_bounded_lp(Rng& rng, int n, int m) {
  Mat A(m, n);
  const Vec z0 = rng.vec(n, -1, 1);
  for (int r = 0; r < m - 1; ++r)
    for (int j = 0; j < n; ++j) A(r, j) = rng.uniform(-1, 1);
  A.row(m - 1) = -A.topRows(m - 1).colwise().sum();
  Vec b = A * z0;
  for (int r = 0; r < m; ++r) b(r) += rng.uniform(0.1, 1.0);
  return make(rng.vec(n, -1, 1), A, b);
}

void check_kkt(const LpProblem& p, const LpSolution& s, double tol) {
  REQUIRE(s.optimal());
  const Vec stat = p.c + p.A.transpose() * s.duals;
  CHECK(stat.lpNorm<Eigen::Infinity>() <= tol * (1.0 + p.c.lpNorm<Eigen::Infinity>()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    if (!p.is_equality(r)) CHECK(s.duals(r) >= -tol);
    if (s.duals(r) > 1e-7) {
      CHECK(std::find(s.active_set.begin(), s.active_set.end(), r) != s.active_set.end());
    }
  }
  // Strong duality: c'z = -b'lambda.
  CHECK(s.value == Approx(-p.b.dot(s.duals)).margin(tol * (1.0 + std::abs(s.value))));
}

}  // namespace

TEST_CASE("min x on the unit interval", "[lp]") {
  Mat A(2, 1);
  A << 1, -1;
  const LpProblem p = make(Vec::Ones(1), A, Vec::Map(std::vector<double>{1.0, 0.0}.data(), 2));
  const LpSolution s = solve(p);
  REQUIRE(s.optimal());
  CHECK(s.z(0) == Approx(0).margin(1e-12));
  CHECK(s.value == Approx(0).margin(1e-12));
  CHECK(s.active_set == std::vector<int>{1});
  check_kkt(p, s, 1e-9);
}

TEST_CASE("one-sided bound with improving direction is unbounded", "[lp]") {
  Mat A(1, 1);
  A << -1;
  const LpProblem p = make(-Vec::Ones(1), A, Vec::Zero(1));
  CHECK(solve(p).status == LpStatus::unbounded);
}

TEST_CASE("contradictory rows are infeasible", "[lp]") {
  Mat A(2, 2);
  A << 1, 1, -1, -1;
  Vec b(2);
  b << 1, -2;
  CHECK(solve(make(Vec::Zero(2), A, b)).status == LpStatus::infeasible);
}

TEST_CASE("equality rows handled natively and as pairs", "[lp]") {
  // min x + 2y s.t. x + y = 1, x,y >= 0
  Mat A(3, 2);
  A << 1, 1, -1, 0, 0, -1;
  Vec b(3);
  b << 1, 0, 0;
  LpProblem native = make(Vec::Map(std::vector<double>{1, 2}.data(), 2), A, b);
  native.equality = {1, 0, 0};
  Mat A2(4, 2);
  A2 << 1, 1, -1, -1, -1, 0, 0, -1;
  Vec b2(4);
  b2 << 1, -1, 0, 0;
  const LpProblem paired = make(native.c, A2, b2);
  const LpSolution s1 = solve(native), s2 = solve(paired);
  REQUIRE(s1.optimal());
  REQUIRE(s2.optimal());
  CHECK(s1.value == Approx(1.0));
  CHECK(s2.value == Approx(1.0));
  CHECK(s1.z(0) == Approx(1.0));
  check_kkt(native, s1, 1e-9);
  check_kkt(paired, s2, 1e-9);
}

TEST_CASE("random bounded LPs match vertex enumeration", "[lp][oracle]") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const LpProblem p = random_bounded_lp(rng, 6, 12);
    const auto verts = testing_support::enumerate_vertices(p.A, p.b);
    REQUIRE_FALSE(verts.empty());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : verts) best = std::min(best, p.c.dot(v));
    const LpSolution s = solve(p);
    REQUIRE(s.optimal());
    CHECK(std::abs(s.value - best) <= 1e-9 * (1.0 + std::abs(best)));
    check_kkt(p, s, 1e-8);
  }
}

TEST_CASE("lexicographic tie-break on a flat optimum", "[lp][lex]") {
  // min x1 + x2 s.t. x1 + x2 >= 1, 0 <= x <= 1
  Mat A(5, 2);
  A << -1, -1, 1, 0, -1, 0, 0, 1, 0, -1;
  Vec b(5);
  b << -1, 1, 0, 1, 0;
  const LpProblem p = make(Vec::Ones(2), A, b);
  const LpSolution s = solve_lex_smallest(p);
  REQUIRE(s.optimal());
  CHECK(s.z(0) == Approx(0.0).margin(1e-8));
  CHECK(s.z(1) == Approx(1.0).margin(1e-8));
}

TEST_CASE("lexicographic solve agrees with plain solve on unique optima", "[lp][lex]") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const LpProblem p = random_bounded_lp(rng, 4, 10);
    const LpSolution a = solve(p), b = solve_lex_smallest(p);
    REQUIRE(a.optimal());
    CHECK((a.z - b.z).lpNorm<Eigen::Infinity>() < 1e-7);
    CHECK(std::abs(a.value - b.value) <= 1e-9 * (1 + std::abs(a.value)));
  }
}

TEST_CASE("lexicographic minimum over an optimal face matches enumeration", "[lp][lex][oracle]") {
  Rng rng(23);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    LpProblem p = random_bounded_lp(rng, 4, 10);
    p.c = -p.A.row(0).transpose();  // optimum on the face of row 0
    const auto verts = testing_support::enumerate_vertices(p.A, p.b);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : verts) best = std::min(best, p.c.dot(v));
    std::vector<Vec> face;
    for (const auto& v : verts)
      if (p.c.dot(v) <= best + 1e-9 * (1 + std::abs(best))) face.push_back(v);
    if (face.size() < 2) continue;
    ++checked;
    Vec lex = face.front();
    for (const auto& v : face) {
      for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (v(k) < lex(k) - 1e-9) {
          lex = v;
          break;
        }
        if (v(k) > lex(k) + 1e-9) break;
      }
    }
    const LpSolution s = solve_lex_smallest(p);
    REQUIRE(s.optimal());
    CHECK((s.z - lex).lpNorm<Eigen::Infinity>() < 1e-6);
  }
  CHECK(checked >= 10);
}

TEST_CASE("solve is deterministic bit for bit", "[lp]") {
  Rng rng(5);
  const LpProblem p = random_bounded_lp(rng, 6, 12);
  const LpSolution a = solve(p), b = solve(p);
  CHECK(a.z == b.z);
  CHECK(a.duals == b.duals);
  CHECK(a.basis_rows == b.basis_rows);
}

TEST_CASE("basis rows pin down the vertex", "[lp]") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const LpProblem p = random_bounded_lp(rng, 5, 12);
    const LpSolution s = solve(p);
    REQUIRE(s.optimal());
    REQUIRE(s.basis_rows.size() == 5);
    Mat M(5, 5);
    Vec r(5);
    for (int i = 0; i < 5; ++i) {
      M.row(i) = p.A.row(s.basis_rows[i]);
      r(i) = p.b(s.basis_rows[i]);
    }
    CHECK((M.fullPivLu().solve(r) - s.z).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("no rows: zero objective is optimal, nonzero is unbounded", "[lp]") {
  LpProblem p;
  p.c = Vec::Zero(3);
  p.A = Mat(0, 3);
  p.b = Vec(0);
  CHECK(solve(p).optimal());
  p.c(1) = 1.0;
  CHECK(solve(p).status == LpStatus::unbounded);
}
