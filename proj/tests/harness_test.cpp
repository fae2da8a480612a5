#include "tieline/generator.hpp"
#include "tieline/harness.hpp"
#include "tieline/robust.hpp"

#include <catch_amalgamated.hpp>

using namespace tieline;

namespace {

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

CaseSpec uncertain_spec(std::uint64_t seed, int max_uncertain = 6) {
  Rng rng(1000 + seed);
  GeneratorOptions g;
  g.max_uncertain = max_uncertain;
  g.min_boundary = 1 + static_cast<int>(seed % 2);
  g.max_spill_price = 200;
  return random_case(rng, g);
}

// The scenario-replicated epigraph LP written out in full: variables
// (y, t_1..t_k, x_{i,s} for every area i and box vertex s).
double replicated_lp(const NetworkModel& net) {
  const Eigen::Index ny = net.coupling.dim;
  const auto k = static_cast<Eigen::Index>(net.areas.size());
  std::vector<std::vector<Vec>> verts;
  Eigen::Index nvar = ny + k, nrow = net.coupling.G.rows();
  for (const auto& a : net.areas) {
    verts.push_back(box_vertices(a));
    nvar += static_cast<Eigen::Index>(verts.back().size()) * a.nx();
    nrow += static_cast<Eigen::Index>(verts.back().size()) * (a.m + 1);
  }
  LpProblem lp;
  lp.c = Vec::Zero(nvar);
  lp.c.segment(ny, k).setOnes();
  lp.A = Mat::Zero(nrow, nvar);
  lp.b = Vec::Zero(nrow);
  Eigen::Index col = ny + k, row = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& a = net.areas[static_cast<std::size_t>(i)];
    for (const Vec& xi : verts[static_cast<std::size_t>(i)]) {
      lp.A.block(row, col, a.m, a.nx()) = a.A_x;
      lp.A.block(row, 0, a.m, ny) = a.A_y;
      lp.b.segment(row, a.m) = a.b - a.A_xi * xi;
      row += a.m;
      // c0 + c_xi'xi + c_x'x - t_i <= 0
      lp.A.block(row, col, 1, a.nx()) = a.c_x.transpose();
      lp.A(row, ny + i) = -1.0;
      lp.b(row) = -(a.c0 + a.c_xi.dot(xi));
      ++row;
      col += a.nx();
    }
  }
  lp.A.block(row, 0, net.coupling.G.rows(), ny) = net.coupling.G;
  lp.b.segment(row, net.coupling.G.rows()) = net.coupling.h;
  const LpSolution s = solve(lp);
  REQUIRE(s.optimal());
  return s.value;
}

}  // namespace

TEST_CASE("robust oracle equals the fully replicated epigraph LP", "[harness][oracle]") {
  int nontrivial = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const NetworkModel net = assemble(uncertain_spec(seed, 5));
    const RobustOracleResult o = oracle_robust_enum(net);
    INFO("seed " << seed);
    CHECK(rel(o.value, replicated_lp(net)) < 1e-8);
    if (o.cuts > static_cast<int>(net.areas.size())) ++nontrivial;
  }
  CHECK(nontrivial > 0);
}

TEST_CASE("robust oracle on zero-width boxes equals the joint LP", "[harness][oracle]") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const NetworkModel net = assemble(uncertain_spec(seed, 0));
    CHECK(rel(oracle_robust_enum(net).value, oracle_joint(net, nominal_xi(net)).value) < 1e-9);
  }
}

TEST_CASE("robust oracle refuses boxes beyond its cap", "[harness]") {
  const NetworkModel net = assemble(uncertain_spec(4, 8));
  int total = 0;
  for (const auto& a : net.areas) total += static_cast<int>(uncertain_coords(a).size());
  REQUIRE(total > 2);
  CHECK_THROWS_AS(oracle_robust_enum(net, 2), InputError);
}

TEST_CASE("box vertices count in binary over the uncertain coordinates", "[harness]") {
  const NetworkModel net = assemble(uncertain_spec(4, 8));
  for (const auto& a : net.areas) {
    const auto u = uncertain_coords(a);
    const auto v = box_vertices(a);
    REQUIRE(v.size() == (std::size_t{1} << u.size()));
    CHECK(v.front().isApprox(a.xi_lo));
    if (!u.empty()) CHECK(v[1](u[0]) == a.xi_hi(u[0]));
  }
}

TEST_CASE("sampled costs sit between the joint optimum and the robust cost", "[harness][property]") {
  for (std::uint64_t seed : {13, 15, 17}) {
    const CaseSpec c = uncertain_spec(seed, 8);
    const NetworkModel net = assemble(c);
    const RobustResult r = solve_robust(net, c.options);
    const SampleRecord s = sample_and_compare(net, r.y_star, r.cost, 40, seed);
    CHECK(s.violations == 0);
    for (int k = 0; k < s.n; ++k) {
      CHECK(s.p1[k] <= s.p2[k] + 1e-6 * (1.0 + s.p2[k]));
      CHECK(s.p2[k] <= r.cost + 1e-6 * (1.0 + r.cost));
    }
    CHECK(s.max_p2 <= r.cost + 1e-6 * (1.0 + r.cost));
    int p1_total = 0, p2_total = 0;
    for (int n : s.histogram.p1) p1_total += n;
    for (int n : s.histogram.p2) p2_total += n;
    CHECK(p1_total == s.n);
    CHECK(p2_total == s.n);
  }
}

TEST_CASE("zero-width boxes give identical samples with equal costs", "[harness]") {
  const CaseSpec c = uncertain_spec(2, 0);
  const NetworkModel net = assemble(c);
  const DetSolution d = solve_deterministic(net, nominal_xi(net), c.options);
  const SampleRecord s = sample_and_compare(net, d.run.y_star, d.run.cost, 5, 1);
  for (int k = 0; k < s.n; ++k) {
    CHECK(s.p1[k] == s.p1[0]);
    CHECK(rel(s.p1[k], s.p2[k]) < 1e-9);
  }
}

TEST_CASE("sampling is reproducible from the seed", "[harness][determinism]") {
  const NetworkModel net = assemble(uncertain_spec(13, 8));
  const Vec y = Vec::Zero(net.coupling.dim);
  const SampleRecord a = sample_and_compare(net, y, 1e9, 8, 42);
  const SampleRecord b = sample_and_compare(net, y, 1e9, 8, 42);
  CHECK(a.p1 == b.p1);
  CHECK(a.p2 == b.p2);
  const SampleRecord other = sample_and_compare(net, y, 1e9, 8, 43);
  CHECK(a.p1 != other.p1);
}
