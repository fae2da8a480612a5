// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tieline/casefile.hpp"
#include "tieline/coordinator.hpp"
#include "tieline/generator.hpp"
#include "tieline/harness.hpp"
#include "tieline/report.hpp"
#include "tieline/robust.hpp"

using namespace tieline;

namespace {

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

CaseSpec shipped(const std::string& name) {
  const std::string path = std::string(TIELINE_CASE_DIR) + "/" + name + ".json";
  std::ifstream in(path);
  if (!in) throw InputError("file_unreadable", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

struct Named {
  std::string name;
  CaseSpec spec;
};

std::vector<Named> deterministic_cases() {
  std::vector<Named> out;
  for (std::uint64_t k = 0; k < 30; ++k) {
    Rng rng(5000 + k);
    GeneratorOptions g;
    g.max_uncertain = 6;
    g.min_boundary = 1 + static_cast<int>(k % 2);
    out.push_back({"random-" + std::to_string(5000 + k), random_case(rng, g)});
  }
  for (const char* n : {"tiny2", "small2", "tri3"}) out.push_back({n, shipped(n)});
  return out;
}

std::vector<Named> robust_cases() {
  std::vector<Named> out;
  for (std::uint64_t k = 0; k < 14; ++k) {
    Rng rng(7000 + k);
    GeneratorOptions g;
    g.max_uncertain = 10;
    g.min_boundary = 1 + static_cast<int>(k % 2);
    g.max_spill_price = 200;
    out.push_back({"random-" + std::to_string(7000 + k), random_case(rng, g)});
  }
  // Seeds whose worst cases move between outer iterations.
  for (std::uint64_t s : {13, 15, 17, 27, 41}) {
    Rng rng(1000 + s);
    GeneratorOptions g;
    g.max_uncertain = 8;
    g.min_boundary = 1 + static_cast<int>(s % 2);
    g.max_spill_price = 200;
    out.push_back({"random-" + std::to_string(1000 + s), random_case(rng, g)});
  }
  for (const char* n : {"tiny2", "small2", "tri3"}) out.push_back({n, shipped(n)});
  return out;
}

int total_uncertain(const NetworkModel& net) {
  int total = 0;
  for (const auto& a : net.areas) total += static_cast<int>(uncertain_coords(a).size());
  return total;
}

class Board {
 public:
  void add(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    all_ = all_ && pass;
  }
  bool all() const { return all_; }

 private:
  bool all_ = true;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct RegionRun {
  const NetworkModel* net;
  std::vector<Vec> xi;
  std::vector<CriticalRegion> regions;
};

}  // namespace

int main() {
  Board board;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count(); };
  int direction_violations = 0, direction_runs = 0;

  // 1. Region exploration against the joint LP.
  const std::vector<Named> det_cases = deterministic_cases();
  std::vector<NetworkModel> det_nets;
  for (const auto& c : det_cases) det_nets.push_back(assemble(c.spec));
  std::vector<RegionRun> region_runs;
  {
    int mismatches = 0, errors = 0, three_area = 0;
    double worst = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < det_cases.size(); ++k) {
      const NetworkModel& net = det_nets[k];
      const auto xi = nominal_xi(net);
      try {
        ExploreOptions eo;
        eo.keep_regions = true;
        const DetSolution d = solve_deterministic(net, xi, det_cases[k].spec.options, nullptr, eo);
        const double joint = oracle_joint(net, xi).value;
        worst = std::max(worst, rel(d.run.cost, joint));
        if (rel(d.run.cost, joint) > 1e-6) {
          ++mismatches;
          std::printf("  mismatch %s: %.12g vs %.12g\n", det_cases[k].name.c_str(), d.run.cost, joint);
        }
        direction_violations += d.run.guards.direction_violations;
        ++direction_runs;
        if (net.areas.size() == 3) ++three_area;
        region_runs.push_back({&net, xi, d.run.regions});
      } catch (const Error& e) {
        ++errors;
        std::printf("  error %s: %s\n", det_cases[k].name.c_str(), e.what());
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    board.add(1, mismatches == 0 && errors == 0 && secs < 120.0,
              fmt("%zu cases (%d with three areas, shipped included), %d mismatches, %d errors, worst rel %.2e, %.1f s",
                  det_cases.size(), three_area, mismatches, errors, worst, secs));
  }

  // 2 and 3. Robust loop against vertex enumeration; bound sandwich.
  const std::vector<Named> rob_cases = robust_cases();
  std::vector<NetworkModel> rob_nets;
  for (const auto& c : rob_cases) rob_nets.push_back(assemble(c.spec));
  std::vector<RobustResult> rob_results(rob_cases.size());
  std::vector<bool> rob_ok(rob_cases.size(), false);
  {
    int mismatches = 0, errors = 0, over_cap = 0, checked = 0;
    std::map<std::size_t, int> outer_counts;
    int sandwich_bad = 0, gap_bad = 0, rows = 0;
    for (std::size_t k = 0; k < rob_cases.size(); ++k) {
      const NetworkModel& net = rob_nets[k];
      const SolverOptions& opt = rob_cases[k].spec.options;
      if (total_uncertain(net) > 10) continue;
      try {
        const RobustResult r = solve_robust(net, opt);
        const RobustOracleResult o = oracle_robust_enum(net);
        ++checked;
        rob_results[k] = r;
        rob_ok[k] = true;
        ++outer_counts[r.steps.size()];
        if (r.steps.size() > 10) ++over_cap;
        if (rel(r.cost, o.value) > 1e-6) {
          ++mismatches;
          std::printf("  mismatch %s: %.12g vs %.12g\n", rob_cases[k].name.c_str(), r.cost, o.value);
        }
        for (const OuterStep& s : r.steps) {
          ++rows;
          if (s.lower > s.upper + opt.tol_opt * (1.0 + std::abs(s.lower))) ++sandwich_bad;
        }
        const OuterStep& last = r.steps.back();
        if (last.upper - last.lower > opt.tol_opt * (1.0 + std::abs(last.lower))) ++gap_bad;
        direction_violations += r.guards.direction_violations;
        ++direction_runs;
      } catch (const Error& e) {
        ++errors;
        std::printf("  error %s: %s\n", rob_cases[k].name.c_str(), e.what());
      }
    }
    std::string hist;
    for (const auto& [n, count] : outer_counts) hist += fmt(" %zu:%d", n, count);
    board.add(2, checked >= 10 && mismatches == 0 && errors == 0 && over_cap == 0,
              fmt("%d cases with <= 10 uncertain coordinates, %d mismatches, %d errors; outer iterations (count:cases)%s",
                  checked, mismatches, errors, hist.c_str()));
    board.add(3, rows > 0 && sandwich_bad == 0 && gap_bad == 0,
              fmt("%d outer iterations checked, %d sandwich violations, %d runs ending with a gap", rows, sandwich_bad,
                  gap_bad));
  }

  // 4. Every nonzero direction is a descent direction for every collected piece.
  board.add(4, direction_violations == 0,
            fmt("%d runs, %d pieces with alpha'v <= 0", direction_runs, direction_violations));

  // 5. Affine value on every region explored above, and convexity on a slice.
  {
    int regions = 0, samples = 0, bad = 0;
    Rng rng(11);
    for (const RegionRun& run : region_runs) {
      for (const CriticalRegion& cr : run.regions) {
        ++regions;
        const Polytope p = cr.polytope();
        const Ball ball = chebyshev_ball(p);
        if (ball.radius < 0.0) {
          ++bad;
          continue;
        }
        for (const Vec& z : hit_and_run(p, ball.center, 100, rng)) {
          ++samples;
          const double j = fixed_y_cost(*run.net, z, run.xi);
          if (std::abs(j - cr.value(z)) > 1e-6 * (1.0 + std::abs(j))) ++bad;
        }
      }
    }
    // Convexity: midpoints of every pair on a 9 x 9 grid through the optimum
    // of small2, in the plane of its first two boundary angles.
    const CaseSpec c = shipped("small2");
    const NetworkModel net = assemble(c);
    const auto xi = nominal_xi(net);
    const Vec y0 = solve_deterministic(net, xi, c.options).run.y_star;
    const Polytope Y{net.coupling.G, net.coupling.h};
    std::vector<Vec> grid;
    for (int a = -4; a <= 4; ++a)
      for (int b = -4; b <= 4; ++b) {
        Vec y = y0;
        y(0) += 0.0125 * a;
        y(1) += 0.0125 * b;
        if (Y.contains(y, 0.0)) grid.push_back(y);
      }
    std::vector<double> J;
    for (const Vec& y : grid) J.push_back(fixed_y_cost(net, y, xi));
    int pairs = 0, convex_bad = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t k = i + 1; k < grid.size(); k += 3) {
        ++pairs;
        const double mid = fixed_y_cost(net, 0.5 * (grid[i] + grid[k]), xi);
        const double chord = 0.5 * (J[i] + J[k]);
        if (mid > chord + 1e-6 * (1.0 + std::abs(chord))) ++convex_bad;
      }
    board.add(5, regions > 0 && bad == 0 && grid.size() >= 20 && convex_bad == 0,
              fmt("%d regions, %d interior samples, %d off the affine piece; %zu grid points, %d midpoint pairs, %d "
                  "convexity violations",
                  regions, samples, bad, grid.size(), pairs, convex_bad));
  }

  // 6. Worst-case program against enumeration of the box vertices.
  {
    int pairs = 0, bad = 0, m_bad = 0, fallbacks = 0;
    for (std::size_t k = 0; k < rob_cases.size() && pairs < 20; ++k) {
      if (!rob_ok[k]) continue;
      const NetworkModel& net = rob_nets[k];
      const SolverOptions& opt = rob_cases[k].spec.options;
      for (const auto& a : net.areas) {
        const auto u = uncertain_coords(a);
        if (u.empty() || u.size() > 8 || pairs >= 20) continue;
        const Vec& y = rob_results[k].y_star;
        ++pairs;
        const WorstCase wc = solve_worst_case(a, y, opt);
        double enumerated = -std::numeric_limits<double>::infinity();
        for (const Vec& xi : box_vertices(a)) enumerated = std::max(enumerated, solve_parametric_point(a, y, xi).cost);
        if (std::abs(wc.value - enumerated) > opt.tol_opt * (1.0 + std::abs(enumerated))) ++bad;
        const BigMChoice m = choose_big_m(a, box_of(a), opt.big_m_fallback);
        if (m.fallback) ++fallbacks;
        const WorstCaseMilp p1 = build_worstcase_milp(a, y, box_of(a), m.M);
        const WorstCaseMilp p10 = build_worstcase_milp(a, y, box_of(a), 10.0 * m.M);
        const MilpSolution s1 = solve_milp(p1.milp), s10 = solve_milp(p10.milp);
        if (!s1.optimal() || !s10.optimal() ||
            std::abs(p1.value(s1.value) - p10.value(s10.value)) >= opt.tol_opt * (1.0 + std::abs(enumerated)))
          ++m_bad;
      }
    }
    board.add(6, pairs >= 20 && bad == 0 && m_bad == 0,
              fmt("%d (area, y*) pairs, %d differ from enumeration, %d move under 10x M (%d used the fallback M)", pairs,
                  bad, m_bad, fallbacks));
  }

  // 7. Sampling relationship on small2.
  {
    const CaseSpec c = shipped("small2");
    const NetworkModel net = assemble(c);
    const RobustResult r = solve_robust(net, c.options);
    const SampleRecord s = sample_and_compare(net, r.y_star, r.cost, 200, c.options.seed, 1e-6);
    board.add(7, s.n == 200 && s.violations == 0,
              fmt("200 samples (seed %llu), %d violations, max re-dispatch %.6f vs robust %.6f",
                  static_cast<unsigned long long>(c.options.seed), s.violations, s.max_p2, r.cost));
  }

  // 8. Transcripts carry only the protocol payloads.
  {
    const CaseSpec c = shipped("small2");
    const NetworkModel net = assemble(c);
    Transcript det_t, rob_t;
    solve_deterministic(net, nominal_xi(net), c.options, &det_t);
    solve_robust(net, c.options, &rob_t);
    int lines = 0, invalid = 0;
    std::map<std::string, int> schemas;
    for (const Transcript* t : {&det_t, &rob_t})
      for (const std::string& line : t->lines()) {
        ++lines;
        if (!transcript_line_valid(line)) {
          ++invalid;
          continue;
        }
        ++schemas[nlohmann::json::parse(line)["schema"].get<std::string>()];
      }
    std::string seen;
    for (const auto& [s, n] : schemas) seen += fmt(" %s:%d", s.c_str(), n);
    board.add(8, lines > 0 && invalid == 0 && schemas.size() == 4,
              fmt("%d lines, %d failing the schema;%s", lines, invalid, seen.c_str()));
  }

  // 9. Reruns give identical report bytes.
  {
    auto det_report = [] {
      const CaseSpec c = shipped("tri3");
      const NetworkModel net = assemble(c);
      return emit_report(record_deterministic(c, solve_deterministic(net, nominal_xi(net), c.options).run));
    };
    auto rob_report = [](const CaseSpec& c) {
      const NetworkModel net = assemble(c);
      const RobustResult r = solve_robust(net, c.options);
      RunRecord rec = record_robust(c, r);
      rec.mode = "sample";
      rec.samples = sample_and_compare(net, r.y_star, r.cost, 50, c.options.seed);
      return emit_report(rec);
    };
    const CaseSpec small2 = shipped("small2");
    const CaseSpec random = rob_cases.front().spec;
    int same = 0, runs = 0;
    for (int k = 0; k < 3; ++k) {
      ++runs;
      same += det_report() == det_report();
    }
    ++runs;
    same += rob_report(small2) == rob_report(small2);
    ++runs;
    same += rob_report(random) == rob_report(random);
    board.add(9, same == runs, fmt("%d of %d repeated runs byte-identical", same, runs));
  }

  std::printf("total %.1f s\n", elapsed());
  return board.all() ? 0 : 1;
}
