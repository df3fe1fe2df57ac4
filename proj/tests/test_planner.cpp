#include <algorithm>

#include "doctest.h"
#include "kbpkit/error.hpp"
#include "kbpkit/parser.hpp"
#include "kbpkit/planner.hpp"
#include "kbpkit/reductions.hpp"
#include "kbpkit/semantics.hpp"
#include "support.hpp"

using namespace kbp;

namespace {

using Kind = ExistenceAnswer::Kind;

void check_witness(const PlanningProblem& p, const ExistenceAnswer& a) {
  if (!a.exists()) return;
  CHECK(verify_plan(p, a.witness).valid());
  auto v = oracle::valid(a.witness, p);
  REQUIRE(v.has_value());
  CHECK(*v);
}

PlanningProblem epistemic_only(gen::Rng& rng, std::size_t nvars, std::size_t nacts) {
  return gen::problem(rng, {nvars, 0, nacts});
}

// Positive SKNNF: K atoms under & and |.
Formula positive_goal(gen::Rng& rng, std::size_t nvars, int depth) {
  if (depth <= 0 || gen::pick(rng, 3) == 0) return Formula::know(gen::objective(rng, nvars, 2, false));
  Formula a = positive_goal(rng, nvars, depth - 1);
  Formula b = positive_goal(rng, nvars, depth - 1);
  return gen::coin(rng) ? (a & b) : (a | b);
}

// All while-free programs of size exactly s over the actions and conditions.
std::vector<Kbp> programs(const PlanningProblem& p, const std::vector<Formula>& vocab, std::size_t s);

std::vector<Kbp> statements(const PlanningProblem& p, const std::vector<Formula>& vocab, std::size_t s) {
  std::vector<Kbp> out;
  if (s == 1) {
    for (std::size_t i = 0; i < p.ontic.size(); ++i)
      out.push_back(Kbp::act(p.ontic[i].name, ActionRef{ActionKind::kOntic, i}));
    for (std::size_t i = 0; i < p.epistemic.size(); ++i)
      out.push_back(Kbp::act(p.epistemic[i].name, ActionRef{ActionKind::kEpistemic, i}));
  }
  for (const Formula& c : vocab) {
    const std::size_t cs = formula_size(c);
    if (cs > s) continue;
    for (std::size_t left = 0; left <= s - cs; ++left)
      for (const Kbp& a : programs(p, vocab, left))
        for (const Kbp& b : programs(p, vocab, s - cs - left)) out.push_back(Kbp::branch(c, a, b));
  }
  return out;
}

std::vector<Kbp> programs(const PlanningProblem& p, const std::vector<Formula>& vocab, std::size_t s) {
  if (s == 0) return {Kbp::empty()};
  std::vector<Kbp> out;
  for (std::size_t t = 1; t <= s; ++t)
    for (const Kbp& head : statements(p, vocab, t))
      for (const Kbp& tail : programs(p, vocab, s - t))
        out.push_back(tail.is_empty() ? head : Kbp::seq(head, tail));
  return out;
}

bool bounded_oracle(const PlanningProblem& p, const std::vector<Formula>& vocab, std::size_t k) {
  for (std::size_t s = 0; s <= k; ++s)
    for (const Kbp& pi : programs(p, vocab, s))
      if (oracle::valid(pi, p).value_or(false)) return true;
  return false;
}

// Ordered trees: from M, either G holds or some action not before `from`
// leads every feedback successor to a solved state.
bool wfoe_oracle(const PlanningProblem& p, const std::vector<std::size_t>& order, const KnowledgeState& m,
                 std::size_t from) {
  if (oracle::holds(m, p.goal)) return true;
  for (std::size_t j = from; j < order.size(); ++j) {
    auto next = oracle::step(p, {ActionKind::kEpistemic, order[j]}, m);
    if (std::all_of(next.begin(), next.end(),
                    [&](const KnowledgeState& n) { return wfoe_oracle(p, order, n, j + 1); }))
      return true;
  }
  return false;
}

Qbf qbf(const char* text) { return parse_qbf(text); }

}  // namespace

TEST_CASE("existence examples") {
  auto repair = fixtures::repair_problem();
  auto a = solve_existence(repair);
  CHECK(a.kind == Kind::kExists);
  check_witness(repair, a);
  CHECK(is_while_free(a.witness));
  CHECK(is_standard_policy(a.witness, repair));

  auto none = parse_problem("var x\ninit: true\ngoal: K(!(x & !x))\n");
  auto b = solve_existence(none);
  CHECK(b.kind == Kind::kExists);
  CHECK(b.witness.is_empty());

  auto c = reduce_qbf2_epistemic(qbf("forall a1\nexists b1\nmatrix: a1\n"));
  CHECK(solve_existence(c.problem).kind == Kind::kNone);
}

TEST_CASE("epistemic-only examples") {
  auto t = reduce_qbf2_epistemic(qbf("forall a1\nexists b1\nmatrix: a1 | b1\n"));
  auto a = solve_existence_epistemic(t.problem);
  CHECK(a.kind == Kind::kExists);
  check_witness(t.problem, a);

  auto trivial = parse_problem("var x\ninit: true\nepistemic tx: x ; !x\ngoal: K(true)\n");
  auto b = solve_existence_epistemic(trivial);
  CHECK(b.kind == Kind::kExists);
  CHECK(b.witness.is_empty());

  auto kx = parse_problem("var x\ninit: true\nepistemic tx: x ; !x\ngoal: K(x)\n");
  CHECK(solve_existence_epistemic(kx).kind == Kind::kNone);

  CHECK_THROWS_AS(solve_existence_epistemic(fixtures::repair_problem()), ContractViolation);
}

TEST_CASE("positive examples") {
  auto taut = parse_problem("var x\ninit: true\ngoal: K(!(x & !x))\n");
  CHECK(solve_epistemic_positive(taut).kind == Kind::kExists);
  auto sat = parse_problem("var x\ninit: true\ngoal: K(!x)\n");
  CHECK(solve_epistemic_positive(sat).kind == Kind::kNone);
  auto both = parse_problem(
      "var x y\ninit: true\nepistemic tx: x ; !x\nepistemic ty: y ; !y\n"
      "goal: (K(x) | K(!x)) & (K(y) | K(!y))\n");
  auto a = solve_epistemic_positive(both);
  REQUIRE(a.kind == Kind::kExists);
  CHECK(to_string(a.witness, both.variables) == "tx;\nty\n");
  check_witness(both, a);
  auto neg = parse_problem("var x\ninit: true\nepistemic tx: x ; !x\ngoal: !K(x)\n");
  CHECK_THROWS_AS(solve_epistemic_positive(neg), ContractViolation);
}

TEST_CASE("bounded examples") {
  auto t = reduce_qbf2_bounded_pos(qbf("exists a1\nforall b1\nmatrix: a1\n"));
  auto a = solve_bounded(t.problem, 1, default_vocabulary(t.problem));
  CHECK(a.kind == Kind::kExists);
  CHECK(action_occurrences(a.witness) == 1);
  check_witness(t.problem, a);

  auto f = reduce_qbf2_bounded_pos(qbf("exists a1\nforall b1\nmatrix: b1\n"));
  CHECK(solve_bounded(f.problem, 1, default_vocabulary(f.problem)).kind == Kind::kNone);

  auto trivial = parse_problem("var x\ninit: true\ngoal: K(true)\n");
  auto z = solve_bounded(trivial, 0, {});
  CHECK(z.kind == Kind::kExists);
  CHECK(z.witness.is_empty());

  // A false instance: the fixpoint already rules out every plan, so the
  // bounded search answers none rather than a vocabulary-limited unknown.
  auto q = reduce_qbf3_bounded(qbf("exists a1\nforall b1\nexists c1\nmatrix: b1 & c1\n"));
  CHECK_FALSE(qbf_eval(qbf("exists a1\nforall b1\nexists c1\nmatrix: b1 & c1\n")));
  CHECK(solve_existence(q.problem).kind == Kind::kNone);
  CHECK(solve_bounded(q.problem, *q.problem.bound, q.problem.vocabulary, false).kind == Kind::kNone);
}

TEST_CASE("bounded search reports vocabulary limits") {
  // Deciding x needs a branch; with no conditions at all only sequences remain.
  auto p = parse_problem(
      "var x\ninit: true\nontic set: x'\nontic clr: !x'\nepistemic tx: x ; !x\n"
      "goal: K(x) | K(!x)\n");
  auto limited = solve_bounded(p, 1, {});
  CHECK(limited.kind == Kind::kExists);  // a single setter suffices
  auto flip = parse_problem(
      "var x\ninit: true\nontic flip: x' <-> !x\nepistemic tx: x ; !x\ngoal: K(x)\n");
  CHECK(solve_existence(flip).kind == Kind::kExists);
  auto u = solve_bounded(flip, 4, {});
  CHECK(u.kind == Kind::kUnknown);
  CHECK(u.reason.find("vocabulary-limited") != std::string::npos);
  CHECK(solve_bounded(flip, 4, {}, true).kind == Kind::kNone);
  auto v = solve_bounded(flip, 4, default_vocabulary(flip));
  CHECK(v.kind == Kind::kExists);
  check_witness(flip, v);
  CHECK(kbp_size(v.witness) <= 4);
}

TEST_CASE("sequence examples") {
  auto on = parse_problem("var x\ninit: true\nontic set: x'\ngoal: K(x)\n");
  auto a = solve_bounded_sequence(on, 1);
  REQUIRE(a.kind == Kind::kExists);
  CHECK(to_string(a.witness, on.variables) == "set\n");
  CHECK(solve_bounded_sequence(on, 0).kind == Kind::kNone);

  auto t = reduce_qbf2_bounded_pos(qbf("exists a1\nforall b1\nmatrix: a1 | b1\n"));
  auto b = solve_bounded_sequence(t.problem, 1);
  CHECK(b.kind == Kind::kExists);
  check_witness(t.problem, b);
  CHECK_THROWS_AS(solve_bounded_sequence(fixtures::repair_problem(), 3), ContractViolation);
}

TEST_CASE("ordered examples") {
  auto t = reduce_qbf_wfoe(qbf("exists a1\nforall b1\nmatrix: a1 | b1\n"));
  auto a = solve_wfoe(t.problem, t.problem.order);
  CHECK(a.kind == Kind::kExists);
  check_witness(t.problem, a);
  auto f = reduce_qbf_wfoe(qbf("exists a1\nforall b1\nmatrix: a1 & b1\n"));
  CHECK(solve_wfoe(f.problem, f.problem.order).kind == Kind::kNone);
  auto empty = parse_problem("var x\ninit: true\ngoal: K(true)\n");
  CHECK(solve_wfoe(empty, {}).kind == Kind::kExists);
  std::vector<std::string> partial(t.problem.order.begin(), t.problem.order.end() - 1);
  CHECK_THROWS_AS(solve_wfoe(t.problem, partial), ValidationError);
}

TEST_CASE("default vocabulary") {
  auto p = parse_problem("var x\ninit: true\nepistemic tx: x ; !x\ngoal: K(x)\n");
  auto v = default_vocabulary(p);
  Formula x = Formula::var(0);
  CHECK(std::find(v.begin(), v.end(), Formula::know(x)) != v.end());
  CHECK(std::find(v.begin(), v.end(), Formula::know(!x)) != v.end());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) CHECK_FALSE(v[i] == v[j]);
}

TEST_CASE("property: fixpoint existence matches the naive oracle") {
  gen::Rng rng(301);
  std::size_t exists = 0;
  for (int i = 0; i < 200; ++i) {
    auto p = gen::problem(rng, {1 + gen::pick(rng, 3), gen::pick(rng, 3), gen::pick(rng, 3)});
    auto a = solve_existence(p);
    REQUIRE(a.kind != Kind::kUnknown);
    CHECK(a.exists() == oracle::plan_exists(p));
    check_witness(p, a);
    exists += a.exists();
  }
  CHECK(exists > 20);
  CHECK(exists < 180);
}

TEST_CASE("property: epistemic solvers agree") {
  gen::Rng rng(302);
  for (int i = 0; i < 100; ++i) {
    auto p = epistemic_only(rng, 1 + gen::pick(rng, 3), 1 + gen::pick(rng, 3));
    auto a = solve_existence(p);
    auto b = solve_existence_epistemic(p);
    CHECK(a.kind == b.kind);
    check_witness(p, b);
  }
}

TEST_CASE("property: positive entailment agrees with sequence verification") {
  gen::Rng rng(303);
  std::size_t valid = 0;
  for (int i = 0; i < 100; ++i) {
    auto p = epistemic_only(rng, 1 + gen::pick(rng, 3), gen::pick(rng, 4));
    p.goal = to_sknnf(positive_goal(rng, p.nvars(), 2));
    REQUIRE(is_positive(p.goal));
    std::vector<std::size_t> all;
    std::vector<Kbp> steps;
    for (std::size_t a = 0; a < p.epistemic.size(); ++a) {
      all.push_back(a);
      steps.push_back(Kbp::act(p.epistemic[a].name, ActionRef{ActionKind::kEpistemic, a}));
    }
    const bool v = oracle::valid(sequence(steps), p).value();
    CHECK(positive_sequence_entails_goal(p, all) == v);
    CHECK(solve_epistemic_positive(p).exists() == v);
    CHECK(solve_existence(p).exists() == v);
    valid += v;
  }
  CHECK(valid > 10);
  CHECK(valid < 90);
}

TEST_CASE("property: fixpoint rounds grow and witnesses respect ranks") {
  gen::Rng rng(304);
  for (int i = 0; i < 100; ++i) {
    auto p = gen::problem(rng, {1 + gen::pick(rng, 3), 1 + gen::pick(rng, 2), 1 + gen::pick(rng, 2)});
    auto table = SolvabilityTable::build(p);
    const auto& r = table.rounds();
    CHECK(std::is_sorted(r.begin(), r.end()));
    CHECK(r.size() <= table.size() + 2);
    const std::size_t rank = table.rank(table.initial());
    if (rank == kUnsolvable) continue;
    Kbp w = table.extract(p, table.initial());
    CHECK(is_standard_policy(w, p));
    auto traces = enumerate_traces(w, p);
    REQUIRE(traces.finite());
    for (const auto& t : traces.traces) {
      CHECK(t.choices.size() <= rank);
      CHECK(holds(t.states.back(), p.goal));
    }
  }
}

TEST_CASE("property: bounded search matches program enumeration") {
  gen::Rng rng(305);
  std::size_t exists = 0;
  for (int i = 0; i < 60; ++i) {
    auto p = gen::problem(rng, {1 + gen::pick(rng, 2), gen::pick(rng, 2), 1});
    std::vector<Formula> vocab{gen::condition(rng, p.nvars()), gen::condition(rng, p.nvars())};
    if (formula_size(vocab[1]) > 2) vocab.pop_back();
    const std::size_t k = 1 + gen::pick(rng, 3);
    auto a = solve_bounded(p, k, vocab, true);
    REQUIRE(a.kind != Kind::kUnknown);
    CHECK(a.exists() == bounded_oracle(p, vocab, k));
    if (a.exists()) {
      CHECK(kbp_size(a.witness) <= k);
      CHECK(is_while_free(a.witness));
      check_witness(p, a);
      ++exists;
    }
  }
  CHECK(exists > 5);
}

TEST_CASE("property: ontic sequences match enumeration") {
  gen::Rng rng(306);
  for (int i = 0; i < 50; ++i) {
    auto p = gen::problem(rng, {1 + gen::pick(rng, 3), 1 + gen::pick(rng, 3), 0});
    const std::size_t k = gen::pick(rng, 4);
    std::vector<Formula> none;
    auto a = solve_bounded_sequence(p, k);
    CHECK(a.exists() == bounded_oracle(p, none, k));
    check_witness(p, a);
  }
}

TEST_CASE("property: ordered search matches the ordered-tree oracle") {
  gen::Rng rng(307);
  for (int i = 0; i < 100; ++i) {
    auto p = epistemic_only(rng, 1 + gen::pick(rng, 3), 1 + gen::pick(rng, 3));
    std::vector<std::size_t> order(p.epistemic.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> names;
    for (std::size_t j : order) names.push_back(p.epistemic[j].name);
    auto a = solve_wfoe(p, names);
    CHECK(a.exists() == wfoe_oracle(p, order, oracle::mods(p.init, p.nvars()), 0));
    check_witness(p, a);
  }
}
