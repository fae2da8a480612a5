#include "tieline/generator.hpp"
#include "tieline/report.hpp"

#include <catch_amalgamated.hpp>

using namespace tieline;

namespace {

CaseSpec uncertain_spec(std::uint64_t seed) {
  Rng rng(1000 + seed);
  GeneratorOptions g;
  g.max_uncertain = 8;
  g.min_boundary = 1 + static_cast<int>(seed % 2);
  g.max_spill_price = 200;
  return random_case(rng, g);
}

}  // namespace

TEST_CASE("empty ledger emits an empty iterations array", "[report]") {
  RunRecord r;
  r.case_digest = "fnv1a64:0000000000000000";
  r.mode = "det";
  r.y_star = Vec::Zero(0);
  const std::string text = emit_report(r);
  const auto j = nlohmann::ordered_json::parse(text);
  CHECK(j["iterations"].is_array());
  CHECK(j["iterations"].empty());
  CHECK_FALSE(j.contains("timings"));
  CHECK(emit_report(parse_report(text)) == text);
}

TEST_CASE("robust report has a min and a max row per outer iteration", "[report]") {
  const CaseSpec c = uncertain_spec(13);
  const RobustResult r = solve_robust(assemble(c), c.options);
  REQUIRE(r.steps.size() == 2);
  const RunRecord rec = record_robust(c, r);
  REQUIRE(rec.iterations.size() == 4);
  CHECK(rec.iterations[0].step == "min");
  CHECK(rec.iterations[1].step == "max");
  CHECK(rec.iterations[2].iteration == 2);
  CHECK(rec.bounds.size() == 2);
  const std::string text = emit_report(rec);
  CHECK(emit_report(parse_report(text)) == text);
}

TEST_CASE("reports round-trip byte for byte, with timings and samples", "[report]") {
  const CaseSpec c = uncertain_spec(15);
  const NetworkModel net = assemble(c);
  const RobustResult r = solve_robust(net, c.options);
  RunRecord rec = record_robust(c, r);
  rec.mode = "sample";
  rec.timings = timings_of(r, 0.125);
  rec.samples = sample_and_compare(net, r.y_star, r.cost, 12, 7);
  const std::string text = emit_report(rec);
  CHECK(emit_report(parse_report(text)) == text);
  const DetSolution d = solve_deterministic(net, nominal_xi(net), c.options);
  const std::string det = emit_report(record_deterministic(c, d.run));
  CHECK(emit_report(parse_report(det)) == det);
}

TEST_CASE("reruns produce identical reports", "[report][determinism]") {
  const CaseSpec c = uncertain_spec(17);
  auto run = [&] {
    const NetworkModel net = assemble(c);
    const RobustResult r = solve_robust(net, c.options);
    RunRecord rec = record_robust(c, r);
    rec.samples = sample_and_compare(net, r.y_star, r.cost, 10, 3);
    return emit_report(rec);
  };
  CHECK(run() == run());
}

TEST_CASE("malformed reports are rejected with named errors", "[report]") {
  RunRecord r;
  r.mode = "det";
  r.y_star = Vec::Zero(1);
  std::string text = emit_report(r);
  auto code_of = [](const std::string& t) {
    try {
      parse_report(t);
    } catch (const InputError& e) {
      return e.code();
    }
    return std::string("accepted");
  };
  CHECK(code_of("{") == "report_syntax");
  auto j = nlohmann::ordered_json::parse(text);
  j["extra"] = 1;
  CHECK(code_of(j.dump()) == "report_unknown_key");
  j.erase("extra");
  j.erase("cost");
  CHECK(code_of(j.dump()) == "report_missing_key");
  j["cost"] = "high";
  CHECK(code_of(j.dump()) == "report_type");
}
