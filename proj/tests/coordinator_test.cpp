#include "tieline/coordinator.hpp"
#include "tieline/generator.hpp"
#include "tieline/harness.hpp"

#include <catch_amalgamated.hpp>

using namespace tieline;
using Catch::Approx;

namespace {

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

CaseSpec random_spec(std::uint64_t seed, int min_boundary = 1) {
  Rng rng(seed);
  GeneratorOptions g;
  g.min_boundary = min_boundary;
  return random_case(rng, g);
}

// An area on its own: renumbered as area 1 with its first boundary bus as slack.
CaseSpec isolated(const CaseSpec& c, std::size_t k) {
  CaseSpec out;
  out.base_mva = c.base_mva;
  out.areas = {c.areas[k]};
  out.areas[0].id = 1;
  for (const auto& b : out.areas[0].buses)
    if (b.kind == BusKind::boundary) {
      out.slack = {1, b.id};
      break;
    }
  return out;
}

struct Tampering : SystemOperator {
  using SystemOperator::SystemOperator;
  CrResponse answer(const CrQuery& q) const override {
    CrResponse r = SystemOperator::answer(q);
    // Move the region so that it no longer holds y.
    r.d -= r.D * q.y;
    r.d.array() -= 1.0;
    return r;
  }
};

}  // namespace

TEST_CASE("zero-capacity ties give the sum of isolated dispatches", "[coordinator][oracle]") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Rng rng(seed);
    GeneratorOptions g;
    g.max_boundary = 1;
    CaseSpec c = random_case(rng, g);
    for (auto& t : c.tielines) t.capacity = 0.0;
    const NetworkModel net = assemble(c);
    const auto xi = nominal_xi(net);
    const DetSolution det = solve_deterministic(net, xi, c.options);
    double sum = 0.0;
    for (std::size_t k = 0; k < c.areas.size(); ++k) {
      const NetworkModel alone = assemble(isolated(c, k));
      sum += oracle_joint(alone, {xi[k]}).value;
    }
    CHECK(rel(det.run.cost, sum) <= 1e-9);
    CHECK(det.run.y_star.lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("exploration matches the joint LP on random cases", "[coordinator][oracle]") {
  for (std::uint64_t seed = 100; seed < 112; ++seed) {
    const CaseSpec c = random_spec(seed, seed % 2 ? 2 : 1);
    const NetworkModel net = assemble(c);
    const auto xi = nominal_xi(net);
    const DetSolution det = solve_deterministic(net, xi, c.options);
    const JointSolution joint = oracle_joint(net, xi);
    CHECK(rel(det.run.cost, joint.value) <= 1e-6);
    CHECK(det.run.guards.direction_violations == 0);
    // Each operator's recovered dispatch prices out to the reported cost.
    double total = 0.0;
    for (const auto& d : det.dispatch) total += d.cost;
    CHECK(rel(total, det.run.cost) <= 1e-9);
  }
}

TEST_CASE("zero start and a random start reach the same cost", "[coordinator][oracle]") {
  Rng rng(4);
  for (std::uint64_t seed = 200; seed < 205; ++seed) {
    const CaseSpec c = random_spec(seed, 2);
    const NetworkModel net = assemble(c);
    const auto xi = nominal_xi(net);
    const Polytope Y{net.coupling.G, net.coupling.h};
    const Vec start = hit_and_run(Y, chebyshev_ball(Y).center, 1, rng, 10).front();
    ExploreOptions eo;
    eo.start = &start;
    const DetSolution a = solve_deterministic(net, xi, c.options);
    const DetSolution b = solve_deterministic(net, xi, c.options, nullptr, eo);
    CHECK(rel(a.run.cost, b.run.cost) <= 1e-6);
  }
}

TEST_CASE("incumbent cost never increases and moves only on strict decrease", "[coordinator][property]") {
  for (std::uint64_t seed = 300; seed < 306; ++seed) {
    const CaseSpec c = random_spec(seed, 2);
    const NetworkModel net = assemble(c);
    const DetSolution det = solve_deterministic(net, nominal_xi(net), c.options);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& s : det.run.steps) {
      CHECK(s.J_star <= prev);
      if (s.improved) CHECK(s.J_star < prev);
      else CHECK(s.J_star == prev);
      prev = s.J_star;
    }
    CHECK(det.run.guards.non_vertex == 0);
  }
}

TEST_CASE("transcripts carry only regions, pieces and query points", "[coordinator][privacy]") {
  const CaseSpec c = random_spec(7, 2);
  const NetworkModel net = assemble(c);
  Transcript tr;
  const DetSolution det = solve_deterministic(net, nominal_xi(net), c.options, &tr);
  REQUIRE_FALSE(tr.lines().empty());
  CHECK(tr.lines().size() == 2 * net.areas.size() * static_cast<std::size_t>(det.run.regions_explored));
  for (const auto& line : tr.lines()) {
    CHECK(transcript_line_valid(line));
    for (const char* leak : {"\"b\"", "\"c_x\"", "\"A_x\"", "\"xi\"", "fingerprint"})
      CHECK(line.find(leak) == std::string::npos);
  }
  CHECK_FALSE(transcript_line_valid(R"({"schema":"cr_query","area":1,"y":[0],"xi":[1]})"));
  CHECK_FALSE(transcript_line_valid(R"({"schema":"wc_response","area":1,"J_opt":1,"w":[1]})"));
}

TEST_CASE("single-scenario answers equal the area region", "[coordinator]") {
  const CaseSpec c = random_spec(9);
  const NetworkModel net = assemble(c);
  const Vec xi = net.areas[0].xi_lo;
  const SystemOperator so(net.areas[0], net.coupling, {xi});
  const Vec y = Vec::Zero(net.coupling.dim);
  const CrResponse r = so.answer({net.areas[0].id, y});
  const CriticalRegion cr = area_region(net.areas[0], net.coupling, y, xi);
  CHECK(r.alpha == cr.alpha);
  CHECK(r.beta == cr.beta);
  CHECK(r.D == cr.D);
  CHECK(r.d == cr.d);
}

TEST_CASE("a response that does not hold the query point is rejected", "[coordinator]") {
  const CaseSpec c = random_spec(11);
  const NetworkModel net = assemble(c);
  const auto xi = nominal_xi(net);
  Tampering bad(net.areas[0], net.coupling, {xi[0]});
  SystemOperator good(net.areas[1], net.coupling, {xi[1]});
  std::vector<SystemOperator*> sos{&bad, &good};
  try {
    explore(sos, net.coupling, c.options);
    FAIL("tampered response accepted");
  } catch (const SolverError& e) {
    CHECK(e.code() == "response_rejected");
  }
}

TEST_CASE("projection onto a box clamps coordinates", "[coordinator]") {
  Polytope box{Mat(4, 2), Vec(4)};
  box.A << 1, 0, -1, 0, 0, 1, 0, -1;
  box.b << 1, 1, 2, 2;
  Vec t(2), start = Vec::Zero(2);
  t << 3, -0.5;
  CHECK(project(box, t, start).isApprox(Vec((Vec(2) << 1, -0.5).finished())));
  t << -4, 5;
  CHECK(project(box, t, start).isApprox(Vec((Vec(2) << -1, 2).finished())));
  // Triangle x + y <= 1, x >= 0, y >= 0: (1, 1) lands on (0.5, 0.5).
  Polytope tri{Mat(3, 2), Vec(3)};
  tri.A << 1, 1, -1, 0, 0, -1;
  tri.b << 1, 0, 0;
  t << 1, 1;
  CHECK(project(tri, t, start).isApprox(Vec((Vec(2) << 0.5, 0.5).finished())));
}
