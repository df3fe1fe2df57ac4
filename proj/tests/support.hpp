#pragma once

// Shared test helpers: brute-force oracles written against the formula AST
// only, and seeded random generators.

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kbpkit/kbp.hpp"
#include "kbpkit/parser.hpp"
#include "kbpkit/problem.hpp"
#include "kbpkit/qbf.hpp"
#include "kbpkit/semantics.hpp"

namespace oracle {

using namespace kbp;

inline bool bit(std::uint64_t s, std::size_t i) { return (s >> (63 - i)) & 1; }

inline bool eval(const Formula& f, State cur, State next = State{}) {
  switch (f.op()) {
    case Connective::kTrue: return true;
    case Connective::kFalse: return false;
    case Connective::kVar: return bit(cur.bits(), f.var());
    case Connective::kPrimed: return bit(next.bits(), f.var());
    case Connective::kNot: return !eval(f.lhs(), cur, next);
    case Connective::kAnd: return eval(f.lhs(), cur, next) && eval(f.rhs(), cur, next);
    case Connective::kOr: return eval(f.lhs(), cur, next) || eval(f.rhs(), cur, next);
    case Connective::kImplies: return !eval(f.lhs(), cur, next) || eval(f.rhs(), cur, next);
    case Connective::kIff: return eval(f.lhs(), cur, next) == eval(f.rhs(), cur, next);
    case Connective::kKnow: break;
  }
  throw std::logic_error("oracle::eval on K");
}

inline std::vector<State> all_states(std::size_t n) {
  std::vector<State> out;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) out.push_back(State(n ? v << (64 - n) : 0));
  return out;
}

inline KnowledgeState mods(const Formula& f, std::size_t n) {
  std::vector<State> out;
  for (State s : all_states(n))
    if (eval(f, s)) out.push_back(s);
  return KnowledgeState(out);
}

inline bool holds(const KnowledgeState& m, const Formula& f) {
  switch (f.op()) {
    case Connective::kTrue: return true;
    case Connective::kFalse: return false;
    case Connective::kKnow:
      for (State s : m)
        if (!eval(f.lhs(), s)) return false;
      return true;
    case Connective::kNot: return !oracle::holds(m, f.lhs());
    case Connective::kAnd: return oracle::holds(m, f.lhs()) && oracle::holds(m, f.rhs());
    case Connective::kOr: return oracle::holds(m, f.lhs()) || oracle::holds(m, f.rhs());
    case Connective::kImplies: return !oracle::holds(m, f.lhs()) || oracle::holds(m, f.rhs());
    case Connective::kIff: return oracle::holds(m, f.lhs()) == oracle::holds(m, f.rhs());
    default: throw std::logic_error("oracle::holds on an objective formula");
  }
}

// Image of M under an ontic theory by pair enumeration.
inline KnowledgeState image(const KnowledgeState& m, const Formula& theory, std::size_t n) {
  std::set<State> out;
  for (State s : m)
    for (State t : all_states(n))
      if (eval(theory, s, t)) out.insert(t);
  return KnowledgeState(std::vector<State>(out.begin(), out.end()));
}

inline std::optional<KnowledgeState> filter(const KnowledgeState& m, const Formula& phi) {
  std::vector<State> out;
  for (State s : m)
    if (eval(phi, s)) out.push_back(s);
  if (out.empty()) return std::nullopt;
  return KnowledgeState(out);
}

// Successor knowledge states of one action, one per outcome (duplicates kept).
inline std::vector<KnowledgeState> step(const PlanningProblem& p, ActionRef ref, const KnowledgeState& m) {
  if (ref.kind == ActionKind::kOntic) return {image(m, p.ontic[ref.index].theory, p.nvars())};
  std::vector<KnowledgeState> out;
  for (const Formula& phi : p.epistemic[ref.index].feedbacks)
    if (auto next = filter(m, phi)) out.push_back(*next);
  return out;
}

// Direct recursive interpreter. Each run is the sequence of knowledge states
// visited; nullopt when some branch exceeds `fuel` steps.
using Run = std::vector<KnowledgeState>;
inline std::optional<std::vector<Run>> runs(const Kbp& pi, const PlanningProblem& p, const Run& prefix,
                                            std::size_t& fuel) {
  const KnowledgeState& m = prefix.back();
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty: return std::vector<Run>{prefix};
    case Kbp::Kind::kAct: {
      if (fuel == 0) return std::nullopt;
      --fuel;
      std::vector<Run> out;
      for (const KnowledgeState& next : step(p, *pi.ref(), m)) {
        Run r = prefix;
        r.push_back(next);
        out.push_back(std::move(r));
      }
      return out;
    }
    case Kbp::Kind::kSeq: {
      auto firsts = runs(pi.first(), p, prefix, fuel);
      if (!firsts) return std::nullopt;
      std::vector<Run> out;
      for (const Run& r : *firsts) {
        auto rest = runs(pi.second(), p, r, fuel);
        if (!rest) return std::nullopt;
        out.insert(out.end(), rest->begin(), rest->end());
      }
      return out;
    }
    case Kbp::Kind::kIf:
      return runs(oracle::holds(m, pi.condition()) ? pi.then_branch() : pi.else_branch(), p, prefix, fuel);
    case Kbp::Kind::kWhile: {
      if (!oracle::holds(m, pi.condition())) return std::vector<Run>{prefix};
      if (fuel == 0) return std::nullopt;
      --fuel;
      auto body = runs(pi.body(), p, prefix, fuel);
      if (!body) return std::nullopt;
      std::vector<Run> out;
      for (const Run& r : *body) {
        auto rest = runs(pi, p, r, fuel);
        if (!rest) return std::nullopt;
        out.insert(out.end(), rest->begin(), rest->end());
      }
      return out;
    }
  }
  return std::nullopt;
}

inline std::optional<std::vector<Run>> runs(const Kbp& pi, const PlanningProblem& p, const KnowledgeState& m0,
                                            std::size_t fuel = 4000) {
  return runs(pi, p, Run{m0}, fuel);
}

// nullopt: diverges (fuel exhausted); otherwise validity.
inline std::optional<bool> valid(const Kbp& pi, const PlanningProblem& p, std::size_t fuel = 4000) {
  auto rs = runs(pi, p, mods(p.init, p.nvars()), fuel);
  if (!rs) return std::nullopt;
  for (const Run& r : *rs)
    if (!oracle::holds(r.back(), p.goal)) return false;
  return true;
}

// Least fixpoint over reachable knowledge states, computed naively.
inline bool plan_exists(const PlanningProblem& p, std::size_t max_states = 20000) {
  std::vector<ActionRef> acts;
  for (std::size_t i = 0; i < p.ontic.size(); ++i) acts.push_back({ActionKind::kOntic, i});
  for (std::size_t i = 0; i < p.epistemic.size(); ++i) acts.push_back({ActionKind::kEpistemic, i});
  std::vector<KnowledgeState> seen{mods(p.init, p.nvars())};
  std::set<KnowledgeState> known(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i)
    for (ActionRef a : acts)
      for (KnowledgeState& n : step(p, a, seen[i]))
        if (known.insert(n).second) {
          seen.push_back(n);
          if (seen.size() > max_states) throw std::runtime_error("oracle: too many knowledge states");
        }
  std::set<KnowledgeState> solved;
  for (bool changed = true; changed;) {
    changed = false;
    for (const KnowledgeState& m : seen) {
      if (solved.count(m)) continue;
      bool ok = oracle::holds(m, p.goal);
      for (std::size_t k = 0; !ok && k < acts.size(); ++k) {
        auto next = step(p, acts[k], m);
        ok = std::all_of(next.begin(), next.end(), [&](const KnowledgeState& n) { return solved.count(n) > 0; });
      }
      if (ok) {
        solved.insert(m);
        changed = true;
      }
    }
  }
  return solved.count(seen.front()) > 0;
}

// Truth of a prenex QBF given as (existential?, var) pairs, by recursion.
inline bool qbf(const std::vector<std::pair<bool, std::size_t>>& prefix, const Formula& matrix, State s = State{},
                std::size_t i = 0) {
  if (i == prefix.size()) return eval(matrix, s);
  auto [exists, v] = prefix[i];
  bool a = qbf(prefix, matrix, s.with(v, false), i + 1);
  if (exists == a) return a;
  return qbf(prefix, matrix, s.with(v, true), i + 1);
}

}  // namespace oracle

namespace gen {

using namespace kbp;
using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool coin(Rng& rng) { return pick(rng, 2) == 1; }

inline Formula objective(Rng& rng, std::size_t nvars, int depth, bool iff = true) {
  if (depth <= 0 || pick(rng, 4) == 0) {
    std::size_t k = pick(rng, nvars + 2);
    if (k == nvars) return Formula::truth();
    if (k == nvars + 1) return coin(rng) ? Formula::falsity() : Formula::var(pick(rng, nvars));
    return Formula::var(k);
  }
  switch (pick(rng, iff ? 5 : 4)) {
    case 0: return Formula::negation(objective(rng, nvars, depth - 1, iff));
    case 1: return Formula::conjunction(objective(rng, nvars, depth - 1, iff), objective(rng, nvars, depth - 1, iff));
    case 2: return Formula::disjunction(objective(rng, nvars, depth - 1, iff), objective(rng, nvars, depth - 1, iff));
    case 3: return Formula::implication(objective(rng, nvars, depth - 1, iff), objective(rng, nvars, depth - 1, iff));
    default: return Formula::equivalence(objective(rng, nvars, depth - 1, iff), objective(rng, nvars, depth - 1, iff));
  }
}

// Purely subjective formula with K atoms over small objective bodies.
inline Formula epistemic(Rng& rng, std::size_t nvars, int depth, bool iff = true) {
  if (depth <= 0 || pick(rng, 3) == 0) {
    if (pick(rng, 8) == 0) return coin(rng) ? Formula::truth() : Formula::falsity();
    return Formula::know(objective(rng, nvars, 2, iff));
  }
  switch (pick(rng, iff ? 5 : 4)) {
    case 0: return Formula::negation(epistemic(rng, nvars, depth - 1, iff));
    case 1: return Formula::conjunction(epistemic(rng, nvars, depth - 1, iff), epistemic(rng, nvars, depth - 1, iff));
    case 2: return Formula::disjunction(epistemic(rng, nvars, depth - 1, iff), epistemic(rng, nvars, depth - 1, iff));
    case 3: return Formula::implication(epistemic(rng, nvars, depth - 1, iff), epistemic(rng, nvars, depth - 1, iff));
    default: return Formula::equivalence(epistemic(rng, nvars, depth - 1, iff), epistemic(rng, nvars, depth - 1, iff));
  }
}

inline KnowledgeState knowledge_state(Rng& rng, std::size_t nvars) {
  for (;;) {
    std::vector<State> states;
    for (State s : oracle::all_states(nvars))
      if (coin(rng)) states.push_back(s);
    if (!states.empty()) return KnowledgeState(states);
  }
}

// Per variable: set, clear, keep, flip, or leave unconstrained.
inline Formula ontic_theory(Rng& rng, std::size_t nvars) {
  std::vector<Formula> parts;
  for (std::size_t v = 0; v < nvars; ++v) {
    switch (pick(rng, 6)) {
      case 0: parts.push_back(Formula::primed(v)); break;
      case 1: parts.push_back(Formula::negation(Formula::primed(v))); break;
      case 2: parts.push_back(Formula::equivalence(Formula::primed(v), Formula::negation(Formula::var(v)))); break;
      case 3: break;
      default: parts.push_back(Formula::equivalence(Formula::primed(v), Formula::var(v))); break;
    }
  }
  return conjoin(parts);
}

inline std::vector<Formula> feedbacks(Rng& rng, std::size_t nvars) {
  Formula a = objective(rng, nvars, 2, false);
  switch (pick(rng, 3)) {
    case 0: return {a, Formula::negation(a)};
    case 1: {
      Formula b = objective(rng, nvars, 1, false);
      return {a, Formula::conjunction(Formula::negation(a), b),
              Formula::conjunction(Formula::negation(a), Formula::negation(b))};
    }
    default: return {Formula::disjunction(a, Formula::var(pick(rng, nvars))), Formula::negation(a)};
  }
}

struct ProblemShape {
  std::size_t nvars = 2, ontic = 1, epistemic = 1;
};

inline PlanningProblem problem(Rng& rng, ProblemShape shape) {
  PlanningProblem p;
  for (std::size_t v = 0; v < shape.nvars; ++v) p.variables.declare("v" + std::to_string(v + 1));
  do {
    p.init = objective(rng, shape.nvars, 2);
  } while (oracle::mods(p.init, shape.nvars).empty());
  for (std::size_t i = 0; i < shape.ontic; ++i) p.ontic.push_back({"o" + std::to_string(i + 1), ontic_theory(rng, shape.nvars)});
  for (std::size_t i = 0; i < shape.epistemic; ++i) p.epistemic.push_back({"e" + std::to_string(i + 1), feedbacks(rng, shape.nvars)});
  p.goal = to_sknnf(epistemic(rng, shape.nvars, 2));
  return p;
}

inline Formula condition(Rng& rng, std::size_t nvars) { return to_sknnf(epistemic(rng, nvars, 1, false)); }

inline Formula atom_condition(Rng& rng, std::size_t nvars) {
  Formula k = Formula::know(objective(rng, nvars, 1, false));
  return coin(rng) ? k : Formula::negation(k);
}

// Random linked program of kbp_size at most `budget`.
inline Kbp program(Rng& rng, const PlanningProblem& p, std::size_t budget, int depth = 3) {
  auto action = [&] {
    std::size_t k = pick(rng, p.action_count());
    ActionRef ref = k < p.ontic.size() ? ActionRef{ActionKind::kOntic, k}
                                       : ActionRef{ActionKind::kEpistemic, k - p.ontic.size()};
    return Kbp::act(p.action_name(ref), ref);
  };
  if (budget == 0) return Kbp::empty();
  std::size_t choice = depth <= 0 ? 0 : pick(rng, 6);
  if (choice <= 1 || budget < 3) return action();
  if (choice <= 3) {
    std::size_t left = 1 + pick(rng, budget - 1);
    return Kbp::seq(program(rng, p, left, depth - 1), program(rng, p, budget - left, depth - 1));
  }
  if (choice == 4) {
    Formula c = condition(rng, p.nvars());
    if (formula_size(c) >= budget) return action();
    std::size_t rest = budget - formula_size(c);
    std::size_t left = pick(rng, rest + 1);
    return Kbp::branch(c, program(rng, p, left, depth - 1), program(rng, p, rest - left, depth - 1));
  }
  Formula c = atom_condition(rng, p.nvars());
  if (formula_size(c) >= budget) return action();
  return Kbp::loop(c, program(rng, p, budget - formula_size(c), depth - 1));
}


// Prenex QBF with blocks of the given sizes, alternating from `existential`.
// Variables are named a1.., b1.., c1.. per block. Half the matrices are
// two-term DNFs, the rest arbitrary objective formulas.
inline Qbf qbf(Rng& rng, const std::vector<std::size_t>& blocks, bool existential = true) {
  Qbf psi;
  std::size_t n = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    QuantifierBlock block{(b % 2 == 0) == existential, {}};
    for (std::size_t i = 0; i < blocks[b]; ++i)
      block.vars.push_back(psi.variables.declare(std::string(1, static_cast<char>('a' + b)) + std::to_string(i + 1)));
    n += blocks[b];
    psi.prefix.push_back(block);
  }
  if (coin(rng)) {
    auto term = [&] {
      std::vector<Formula> lits;
      for (std::size_t k = 0, len = 1 + pick(rng, 2); k < len; ++k) {
        Formula v = Formula::var(pick(rng, n));
        lits.push_back(coin(rng) ? v : !v);
      }
      return conjoin(lits);
    };
    psi.matrix = term() | term();
  } else {
    psi.matrix = objective(rng, n, 3);
  }
  return psi;
}

// Every Boolean function of two variables as a DNF over minterms.
inline std::vector<Formula> all_matrices2() {
  std::vector<Formula> out;
  for (unsigned table = 0; table < 16; ++table) {
    std::vector<Formula> terms;
    for (unsigned row = 0; row < 4; ++row) {
      if (!((table >> row) & 1)) continue;
      Formula a = Formula::var(0), b = Formula::var(1);
      terms.push_back(((row & 2) ? a : !a) & ((row & 1) ? b : !b));
    }
    out.push_back(terms.empty() ? Formula::falsity() : disjoin(terms));
  }
  return out;
}

inline Qbf qbf2(bool first_existential, const Formula& matrix) {
  Qbf psi;
  psi.prefix.push_back({first_existential, {psi.variables.declare("a1")}});
  psi.prefix.push_back({!first_existential, {psi.variables.declare("b1")}});
  psi.matrix = matrix;
  return psi;
}

// Base problem for the program gadget: two variables, three ontic and two
// sensing actions.
inline PlanningProblem gadget_base() {
  return parse_problem(R"(var x y
init: true
ontic setx: x' & (y' <-> y)
ontic clrx: !x' & (y' <-> y)
ontic flipy: (y' <-> !y) & (x' <-> x)
epistemic testx: x ; !x
epistemic testy: y ; !y
goal: K(true)
)");
}

inline Formula gadget_condition(Rng& rng) {
  Formula v = Formula::var(pick(rng, 2));
  if (coin(rng)) v = !v;
  switch (pick(rng, 4)) {
    case 0: return Formula::know(v);
    case 1: return !Formula::know(v);
    case 2: return Formula::know(v) | Formula::know(!v);
    default: return (!Formula::know(v)) & (!Formula::know(!v));
  }
}

// Unlinked program over gadget_base's actions.
inline Kbp gadget_program(Rng& rng, int depth) {
  static const char* names[] = {"setx", "clrx", "flipy", "testx", "testy"};
  const std::size_t k = pick(rng, depth > 0 ? 6 : 2);
  if (k <= 1 || depth == 0) return Kbp::act(names[pick(rng, 5)]);
  if (k <= 3) return Kbp::seq(gadget_program(rng, depth - 1), gadget_program(rng, depth - 1));
  if (k == 4)
    return Kbp::branch(gadget_condition(rng), gadget_program(rng, depth - 1),
                       coin(rng) ? Kbp::empty() : gadget_program(rng, depth - 1));
  Formula v = Formula::var(pick(rng, 2));
  if (coin(rng)) v = !v;
  return Kbp::loop(coin(rng) ? Formula::know(v) : !Formula::know(v), gadget_program(rng, depth - 1));
}

// Names of the actions executed on some trace of pi.
inline std::set<std::string> live_actions(const Kbp& pi, const PlanningProblem& p) {
  std::set<std::string> live;
  for_each_trace(pi, p, p.initial_state(), [&](const Trace& t) {
    for (const Choice& c : t.choices) live.insert(p.action_name(c.action));
    return true;
  });
  return live;
}

// Single-edit mutants touching live action occurrences: deletion, or
// replacement by another action of the problem.
inline void mutants(const Kbp& pi, const PlanningProblem& p, const std::set<std::string>& live, Rng& rng,
                    const std::function<Kbp(Kbp)>& wrap, std::vector<Kbp>& out) {
  switch (pi.kind()) {
    case Kbp::Kind::kAct: {
      if (!live.count(pi.action())) break;
      out.push_back(wrap(Kbp::empty()));
      for (int t = 0; t < 2; ++t) {
        std::size_t r = pick(rng, p.action_count());
        ActionRef ref = r < p.ontic.size() ? ActionRef{ActionKind::kOntic, r}
                                           : ActionRef{ActionKind::kEpistemic, r - p.ontic.size()};
        if (p.action_name(ref) != pi.action()) out.push_back(wrap(Kbp::act(p.action_name(ref))));
      }
      break;
    }
    case Kbp::Kind::kSeq:
      mutants(pi.first(), p, live, rng, [&](Kbp x) { return wrap(Kbp::seq(x, pi.second())); }, out);
      mutants(pi.second(), p, live, rng, [&](Kbp x) { return wrap(Kbp::seq(pi.first(), x)); }, out);
      break;
    case Kbp::Kind::kIf:
      mutants(pi.then_branch(), p, live, rng,
              [&](Kbp x) { return wrap(Kbp::branch(pi.condition(), x, pi.else_branch())); }, out);
      mutants(pi.else_branch(), p, live, rng,
              [&](Kbp x) { return wrap(Kbp::branch(pi.condition(), pi.then_branch(), x)); }, out);
      break;
    case Kbp::Kind::kWhile:
      mutants(pi.body(), p, live, rng, [&](Kbp x) { return wrap(Kbp::loop(pi.condition(), x)); }, out);
      break;
    default:
      break;
  }
}

inline std::vector<Kbp> mutants(const Kbp& pi, const PlanningProblem& p, Rng& rng) {
  std::vector<Kbp> out;
  mutants(pi, p, live_actions(pi, p), rng, [](Kbp x) { return x; }, out);
  return out;
}

}  // namespace gen

namespace fixtures {

inline std::string read(const std::string& relative) {
  std::ifstream in(std::string(KBPKIT_SOURCE_DIR) + "/" + relative);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline kbp::PlanningProblem repair_problem() { return kbp::parse_problem(read("problems/repair.problem")); }

inline kbp::Kbp repair_plan(const kbp::PlanningProblem& p) {
  return kbp::link(kbp::parse_kbp(read("problems/repair.plan"), p.variables), p);
}

inline const char* kExample2 = R"(repair1;
test2;
if K(!ok2) then
  repair2;
  test3;
  if K(!ok3) then
    repair3
  endif
else
  repair3
endif
)";

}  // namespace fixtures
