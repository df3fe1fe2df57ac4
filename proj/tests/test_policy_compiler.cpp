#include "doctest.h"
#include "kbpkit/compiler.hpp"
#include "kbpkit/parser.hpp"
#include "kbpkit/semantics.hpp"
#include "support.hpp"

using namespace kbp;

TEST_CASE("worked compilation") {
  auto p = fixtures::repair_problem();
  validate_problem(p);
  Kbp pi = fixtures::repair_plan(p);
  CompileResult r = compile_policy(pi, p);
  REQUIRE(r.ok());
  CHECK(to_string(r.policy, p.variables) == fixtures::kExample2);
  CHECK(r.policy == parse_kbp(fixtures::kExample2, p.variables));
  CHECK(equivalent_in(pi, r.policy, p) == Equivalence::kEquivalent);
  CHECK(is_standard_policy(r.policy, p));
}

TEST_CASE("empty program compiles to the empty policy") {
  auto p = fixtures::repair_problem();
  CompileResult r = compile_policy(Kbp::empty(), p);
  REQUIRE(r.ok());
  CHECK(r.policy.is_empty());
  CHECK(to_string(r.policy, p.variables) == "skip\n");
}

TEST_CASE("looping programs are reported") {
  auto p = fixtures::repair_problem();
  Kbp spin = link(Kbp::loop(Formula::know(Formula::truth()), Kbp::act("repair1")), p);
  CHECK(compile_policy(spin, p).kind == CompileResult::Kind::kNonTerminating);
}

TEST_CASE("test chain compiles to a complete feedback tree") {
  for (std::size_t n = 1; n <= 6; ++n) {
    auto [p, chain] = test_chain(n);
    validate_problem(p);
    Kbp pi = link(chain, p);
    CHECK(kbp_size(pi) == n);
    CompileResult r = compile_policy(pi, p);
    REQUIRE(r.ok());
    // One test at the root, two copies one level down, and so on.
    CHECK(action_occurrences(r.policy) == (std::size_t{1} << n) - 1);
    CHECK(kbp_size(r.policy) >= (std::size_t{1} << n) - 1);
    CHECK(is_standard_policy(r.policy, p));
    auto runs = oracle::runs(r.policy, p, oracle::mods(p.init, p.nvars()));
    REQUIRE(runs);
    CHECK(runs->size() == (std::size_t{1} << n));
  }
}

TEST_CASE("succinctness rows") {
  auto rows = measure_succinctness("test-chain", 3);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].n == 0);
  CHECK(rows[0].kbp_size == 0);
  CHECK(rows[0].policy_size == 0);
  CHECK(rows[1].kbp_size == 1);
  CHECK(rows[1].policy_size >= 3);
  CHECK(rows[3].policy_size >= 8);
  CompileLimits tiny;
  tiny.max_nodes = 10;
  auto capped = measure_succinctness("test-chain", 4, tiny);
  CHECK(capped[4].lower_bound);
  CHECK(capped[4].policy_size == 10);
  CHECK(succinctness_csv(rows).rfind("n,kbp_size,policy_size,lower_bound\n", 0) == 0);
  CHECK_THROWS(measure_succinctness("nope", 1));
}

TEST_CASE("cascade order puts strictly smaller branches first") {
  auto big = KnowledgeState::from_strings({"00", "01", "10"});
  auto small = KnowledgeState::from_strings({"01"});
  auto other = KnowledgeState::from_strings({"11"});
  CHECK(cascade_order({{0, small}, {1, big}}) == std::vector<std::size_t>{0, 1});
  CHECK(cascade_order({{0, big}, {1, small}}) == std::vector<std::size_t>{1, 0});
  CHECK(cascade_order({{0, other}, {1, small}}) == std::vector<std::size_t>{1, 0});
  CHECK(cascade_order({{0, small}, {1, small}}).size() == 1);
}

TEST_CASE("property: compiled policies are equivalent, standard and deterministic") {
  gen::Rng rng(401);
  int compiled = 0;
  while (compiled < 200) {
    std::size_t n = 1 + gen::pick(rng, 3);
    PlanningProblem p = gen::problem(rng, {n, 1 + gen::pick(rng, 2), 1 + gen::pick(rng, 2)});
    Kbp pi = gen::program(rng, p, 8);
    if (!oracle::runs(pi, p, oracle::mods(p.init, n))) continue;
    ++compiled;
    CompileResult r = compile_policy(pi, p);
    REQUIRE(r.ok());
    CHECK(equivalent_in(pi, r.policy, p) == Equivalence::kEquivalent);
    CHECK(is_standard_policy(r.policy, p));
    CHECK(to_string(compile_policy(pi, p).policy, p.variables) == to_string(r.policy, p.variables));
    // Independent check: same runs as the source program.
    auto a = oracle::runs(pi, p, oracle::mods(p.init, n));
    auto b = oracle::runs(r.policy, p, oracle::mods(p.init, n));
    REQUIRE(b);
    CHECK(std::set<oracle::Run>(a->begin(), a->end()) == std::set<oracle::Run>(b->begin(), b->end()));
  }
}
