// Command-line front end: solve, oracle, sample and check on a case file.
//
// Exit codes: 0 success, 2 input error, 3 solver failure, 4 cross-check mismatch.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "tieline/casefile.hpp"
#include "tieline/coordinator.hpp"
#include "tieline/harness.hpp"
#include "tieline/netmodel.hpp"
#include "tieline/report.hpp"
#include "tieline/robust.hpp"

using namespace tieline;

namespace {

struct Flags {
  std::string case_path;
  std::string mode = "det";
  std::string report_path;
  std::string big_m;
  double epsilon = 0.0;
  double tol = 0.0;
  int max_iters = 0;
  int n = 200;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool timings = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("file_unreadable", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("file_unwritable", "cannot write " + path);
  out << text;
}

// Case options, overridden by whichever global flags were given.
CaseSpec load_case(const Flags& f) {
  CaseSpec c = parse_case(read_file(f.case_path));
  SolverOptions& o = c.options;
  if (f.epsilon > 0.0) o.epsilon = f.epsilon;
  if (f.tol > 0.0) o.tol_opt = f.tol;
  if (f.max_iters > 0) o.max_iters = f.max_iters;
  if (!f.big_m.empty()) {
    if (f.big_m == "auto") {
      o.big_m.automatic = true;
    } else {
      try {
        std::size_t used = 0;
        o.big_m.value = std::stod(f.big_m, &used);
        if (used != f.big_m.size()) throw std::invalid_argument(f.big_m);
      } catch (const std::logic_error&) {
        throw InputError("option_invalid", "--big-m takes \"auto\" or a number, got \"" + f.big_m + "\"");
      }
      if (!(o.big_m.value > 0.0)) throw InputError("option_nonpositive", "--big-m must be positive");
      o.big_m.automatic = false;
    }
  }
  if (f.seed_set) o.seed = f.seed;
  validate(c);
  return c;
}

void print_solution(const std::string& label, double cost, const Vec& y) {
  std::printf("%s cost %.10g\n", label.c_str(), cost);
  std::printf("y*");
  for (Eigen::Index i = 0; i < y.size(); ++i) std::printf(" %.10g", y(i));
  std::printf("\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void finish(const Flags& f, const RunRecord& r) {
  if (!f.report_path.empty()) write_file(f.report_path, emit_report(r));
}

void check_mode(const Flags& f) {
  if (f.mode != "det" && f.mode != "robust")
    throw InputError("option_invalid", "--mode takes det or robust, got \"" + f.mode + "\"");
}

int run_solve(const Flags& f) {
  check_mode(f);
  const CaseSpec c = load_case(f);
  const NetworkModel net = assemble(c);
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r;
  if (f.mode == "det") {
    const DetSolution d = solve_deterministic(net, nominal_xi(net), c.options);
    r = record_deterministic(c, d.run);
    if (f.timings) r.timings = timings_of(d.run, seconds_since(t0));
    print_solution("det", d.run.cost, d.run.y_star);
    std::printf("regions %d\n", d.run.regions_explored);
  } else {
    const RobustResult rr = solve_robust(net, c.options);
    r = record_robust(c, rr);
    if (f.timings) r.timings = timings_of(rr, seconds_since(t0));
    for (const OuterStep& s : rr.steps)
      std::printf("outer %d lower %.10g upper %.10g regions %d\n", s.iteration, s.lower, s.upper, s.regions_explored);
    print_solution("robust", rr.cost, rr.y_star);
  }
  finish(f, r);
  return 0;
}

int run_oracle(const Flags& f) {
  check_mode(f);
  const CaseSpec c = load_case(f);
  const NetworkModel net = assemble(c);
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r;
  r.case_digest = case_digest(c);
  if (f.mode == "det") {
    const JointSolution j = oracle_joint(net, nominal_xi(net));
    r.mode = "oracle-det";
    r.cost = j.value;
    r.y_star = j.y;
  } else {
    const RobustOracleResult o = oracle_robust_enum(net);
    r.mode = "oracle-robust";
    r.cost = o.value;
    r.y_star = o.y;
  }
  if (f.timings) r.timings = Timings{seconds_since(t0), {}};
  print_solution(r.mode, r.cost, r.y_star);
  finish(f, r);
  return 0;
}

int run_sample(const Flags& f) {
  const CaseSpec c = load_case(f);
  const NetworkModel net = assemble(c);
  const auto t0 = std::chrono::steady_clock::now();
  const RobustResult rr = solve_robust(net, c.options);
  RunRecord r = record_robust(c, rr);
  r.mode = "sample";
  r.samples = sample_and_compare(net, rr.y_star, rr.cost, f.n, c.options.seed);
  if (f.timings) r.timings = timings_of(rr, seconds_since(t0));
  const SampleRecord& s = *r.samples;
  std::printf("robust cost %.10g\n", rr.cost);
  std::printf("samples %d seed %llu max_p2 %.10g violations %d\n", s.n, static_cast<unsigned long long>(s.seed),
              s.max_p2, s.violations);
  finish(f, r);
  return s.violations == 0 ? 0 : 4;
}

int run_check(const Flags& f) {
  const CaseSpec c = load_case(f);
  const NetworkModel net = assemble(c);
  int failures = 0;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s %s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  };
  auto rel = [](double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); };
  char buf[256];

  const auto xi = nominal_xi(net);
  const DetSolution d = solve_deterministic(net, xi, c.options);
  const double joint = oracle_joint(net, xi).value;
  std::snprintf(buf, sizeof buf, "exploration %.10g joint %.10g", d.run.cost, joint);
  report(rel(d.run.cost, joint) <= 1e-6, "deterministic_vs_joint", buf);
  report(d.run.guards.direction_violations == 0, "direction_descent",
         std::to_string(d.run.guards.direction_violations) + " violations");

  const RobustResult rr = solve_robust(net, c.options);
  int total = 0;
  for (const auto& a : net.areas) total += static_cast<int>(uncertain_coords(a).size());
  if (total <= 12) {
    const double enumv = oracle_robust_enum(net).value;
    std::snprintf(buf, sizeof buf, "loop %.10g enumeration %.10g outer %zu", rr.cost, enumv, rr.steps.size());
    report(rel(rr.cost, enumv) <= 1e-6, "robust_vs_enumeration", buf);
  } else {
    std::printf("SKIP robust_vs_enumeration %d uncertain coordinates exceed 12\n", total);
  }
  report(rr.sandwich_violations == 0, "bound_sandwich", std::to_string(rr.sandwich_violations) + " violations");
  report(rr.guards.direction_violations == 0, "robust_direction_descent",
         std::to_string(rr.guards.direction_violations) + " violations");

  const SampleRecord s = sample_and_compare(net, rr.y_star, rr.cost, f.n, c.options.seed);
  std::snprintf(buf, sizeof buf, "%d samples max_p2 %.10g robust %.10g", s.n, s.max_p2, rr.cost);
  report(s.violations == 0, "sample_ordering", buf);

  RunRecord r = record_robust(c, rr);
  finish(f, r);
  return failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tie-line scheduling across multi-area DC networks"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--epsilon", f.epsilon, "Exploration step length")->check(CLI::PositiveNumber);
  app.add_option("--tol", f.tol, "Relative optimality tolerance")->check(CLI::PositiveNumber);
  app.add_option("--big-m", f.big_m, "Big-M for the worst-case program: auto or a value");
  app.add_option("--max-iters", f.max_iters, "Cap on region-exploration iterations")->check(CLI::PositiveNumber);
  app.add_option("--report", f.report_path, "Write the run report to this file");
  app.add_flag("--timings", f.timings, "Include wall-clock timings in the report");

  auto* solve_cmd = app.add_subcommand("solve", "Distributed solve");
  auto* oracle_cmd = app.add_subcommand("oracle", "Centralized reference solve");
  auto* sample_cmd = app.add_subcommand("sample", "Sample the boxes and compare against the robust schedule");
  auto* check_cmd = app.add_subcommand("check", "Run every cross-check on a case");
  for (auto* cmd : {solve_cmd, oracle_cmd, sample_cmd, check_cmd}) {
    cmd->add_option("--case", f.case_path, "Case file")->required();
    cmd->fallthrough();
  }
  for (auto* cmd : {solve_cmd, oracle_cmd}) cmd->add_option("--mode", f.mode, "det or robust");
  for (auto* cmd : {sample_cmd, check_cmd}) {
    cmd->add_option("--n", f.n, "Number of samples")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Sampling seed (defaults to the case seed)")->each([&](const std::string&) {
      f.seed_set = true;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) return run_solve(f);
    if (*oracle_cmd) return run_oracle(f);
    if (*sample_cmd) return run_sample(f);
    return run_check(f);
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const CrossCheckError& e) {
    std::fprintf(stderr, "cross-check mismatch: %s\n", e.what());
    return 4;
  }
}
