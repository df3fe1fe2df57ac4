#include "kbpkit/reductions.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "kbpkit/error.hpp"
#include "kbpkit/logic.hpp"
#include "kbpkit/semantics.hpp"

namespace kbp {

namespace {

Formula conj(const std::vector<Formula>& parts) { return conjoin(parts); }
Formula disj(const std::vector<Formula>& parts) { return disjoin(parts); }
Formula K(const Formula& f) { return Formula::know(f); }
Formula knows_value(std::size_t v) { return K(Formula::var(v)) | K(!Formula::var(v)); }

std::string fresh(const VariableTable& vars, const std::string& base) {
  if (!vars.contains(base)) return base;
  for (std::size_t i = 2;; ++i) {
    std::string name = base + "_" + std::to_string(i);
    if (!vars.contains(name)) return name;
  }
}

std::size_t declare_fresh(VariableTable& vars, const std::string& base) {
  return vars.declare(fresh(vars, base));
}

Formula frame_except(const std::vector<std::size_t>& vars, std::size_t skip) {
  std::vector<std::size_t> kept;
  for (std::size_t v : vars)
    if (v != skip) kept.push_back(v);
  return frame_axioms(kept);
}

void certify(ReductionOutput& out, std::string certificate) {
  out.certificate = std::move(certificate);
  out.problem.notes.push_back("certificate: " + out.certificate);
}

std::vector<std::size_t> concat(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Brute force: does some assignment to `exists` make phi true for every
// assignment to `forall` with some assignment to `inner`? Returns the outer
// assignment (bit i for exists[i]).
std::optional<std::uint64_t> find_outer_witness(const Formula& phi, const std::vector<std::size_t>& exists,
                                                const std::vector<std::size_t>& forall,
                                                const std::vector<std::size_t>& inner) {
  auto assign = [](State s, const std::vector<std::size_t>& vars, std::uint64_t bits) {
    for (std::size_t i = 0; i < vars.size(); ++i) s = s.with(vars[i], (bits >> i) & 1);
    return s;
  };
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << exists.size()); ++a) {
    bool all = true;
    for (std::uint64_t b = 0; all && b < (std::uint64_t{1} << forall.size()); ++b) {
      bool some = false;
      for (std::uint64_t c = 0; !some && c < (std::uint64_t{1} << inner.size()); ++c)
        some = evaluate(phi, assign(assign(assign(State{}, exists, a), forall, b), inner, c));
      all = some;
    }
    if (all) return a;
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::vector<std::size_t>> match_prefix(const Qbf& psi, std::string_view pattern) {
  validate_qbf(psi);
  Qbf n = normalize_prefix(psi);
  std::vector<std::vector<std::size_t>> out(pattern.size());
  std::size_t b = 0;
  for (std::size_t i = 0; i < pattern.size() && b < n.prefix.size(); ++i) {
    if (n.prefix[b].existential == (pattern[i] == 'E')) out[i] = n.prefix[b++].vars;
  }
  if (b != n.prefix.size())
    throw ValidationError("quantifier prefix " + qbf_shape(psi) + " does not fit " + std::string(pattern));
  return out;
}

ReductionOutput reduce_qbf2_epistemic(const Qbf& psi) {
  auto blocks = match_prefix(psi, "AE");
  ReductionOutput out;
  PlanningProblem& p = out.problem;
  p.variables = psi.variables;
  p.init = Formula::truth();
  std::vector<Formula> goal{!K(!psi.matrix)};
  std::vector<Kbp> plan;
  for (std::size_t a : blocks[0]) {
    p.epistemic.push_back(make_test_action("test_" + p.variables.name(a), Formula::var(a)));
    goal.push_back(knows_value(a));
    plan.push_back(Kbp::act(p.epistemic.back().name));
  }
  p.goal = to_sknnf(conj(goal));
  p.notes.push_back("forall-exists QBF as epistemic plan existence");
  out.plan = sequence(plan);
  certify(out, "solvable iff the QBF is true; then testing every universal variable is a valid plan");
  return out;
}

ReductionOutput reduce_unsat_positive(const Formula& phi, const VariableTable& vars) {
  if (!is_objective(phi)) throw ValidationError("unsat reduction expects an objective formula");
  ReductionOutput out;
  out.problem.variables = vars;
  out.problem.init = Formula::truth();
  out.problem.goal = K(!phi);
  out.problem.notes.push_back("unsatisfiability as positive epistemic plan existence");
  out.plan = Kbp::empty();
  certify(out, "solvable iff the formula is unsatisfiable; then the empty plan is valid");
  return out;
}

ReductionOutput reduce_qbf_wfoe(const Qbf& psi) {
  validate_qbf(psi);
  Qbf n = normalize_prefix(psi);
  // Pairs (exists var, forall var) in strict alternation; nullopt is a dummy.
  std::vector<std::pair<std::optional<std::size_t>, std::optional<std::size_t>>> pairs;
  bool want_exists = true;
  for (const auto& block : n.prefix) {
    for (std::size_t v : block.vars) {
      if (want_exists) {
        if (block.existential) {
          pairs.push_back({v, std::nullopt});
          want_exists = false;
        } else {
          pairs.push_back({std::nullopt, v});
        }
      } else if (!block.existential) {
        pairs.back().second = v;
        want_exists = true;
      } else {
        pairs.push_back({v, std::nullopt});
      }
    }
  }
  const std::size_t k = pairs.size();

  ReductionOutput out;
  PlanningProblem& p = out.problem;
  std::vector<std::size_t> xs, ys;
  for (std::size_t i = 1; i <= k; ++i) xs.push_back(p.variables.declare("x" + std::to_string(i)));
  for (std::size_t i = 1; i <= k; ++i) ys.push_back(p.variables.declare("y" + std::to_string(i)));
  std::map<std::size_t, std::pair<bool, std::size_t>> role;  // qbf var -> (exists?, position)
  std::string mapping;
  for (std::size_t i = 0; i < k; ++i) {
    p.epistemic.push_back(make_test_action("test_x" + std::to_string(i + 1), Formula::var(xs[i])));
    p.epistemic.push_back(make_test_action("test_y" + std::to_string(i + 1), Formula::var(ys[i])));
    p.order.push_back(p.epistemic[2 * i].name);
    p.order.push_back(p.epistemic[2 * i + 1].name);
    auto name = [&](const std::optional<std::size_t>& v) {
      return v ? psi.variables.name(*v) : std::string("dummy");
    };
    if (pairs[i].first) role[*pairs[i].first] = {true, i};
    if (pairs[i].second) role[*pairs[i].second] = {false, i};
    mapping += (i ? ", " : "") + name(pairs[i].first) + "/" + name(pairs[i].second);
  }
  p.init = Formula::truth();
  // A false leaf of the matrix becomes K(false).
  p.goal = to_sknnf(substitute_literals(objective_nnf(psi.matrix), [&](std::size_t v, bool positive) {
    auto [exists, i] = role.at(v);
    if (exists) {
      Formula known = knows_value(xs[i]);
      return positive ? known : to_sknnf(!known);
    }
    return positive ? K(Formula::var(ys[i])) : K(!Formula::var(ys[i]));
  }));
  p.notes.push_back("QBF as ordered while-free epistemic plan existence");
  p.notes.push_back("pairs (exists/forall): " + mapping);
  certify(out, "solvable under the order iff the QBF is true");
  return out;
}

ReductionOutput reduce_wfoe_wfe(const PlanningProblem& ordered, MutexReading mutex) {
  validate_problem(ordered);
  if (!ordered.ontic.empty()) throw ValidationError("ordered reduction expects epistemic actions only");
  if (ordered.order.size() != ordered.epistemic.size())
    throw ValidationError("the order must list every epistemic action once");

  ReductionOutput out;
  PlanningProblem& p = out.problem;
  p.variables = ordered.variables;
  p.init = ordered.init;
  const std::size_t n = ordered.order.size();
  struct Fresh {
    std::size_t p, n, mp, mn, mpb, mnb;
  };
  std::vector<Fresh> fv;
  for (std::size_t i = 1; i <= n; ++i) {
    std::string s = std::to_string(i);
    Fresh f{};
    f.p = declare_fresh(p.variables, "p" + s);
    f.n = declare_fresh(p.variables, "n" + s);
    f.mp = declare_fresh(p.variables, "mu_p" + s);
    f.mn = declare_fresh(p.variables, "mu_n" + s);
    f.mpb = declare_fresh(p.variables, "mu_pbar" + s);
    f.mnb = declare_fresh(p.variables, "mu_nbar" + s);
    fv.push_back(f);
  }
  auto variant = [&](const std::string& name, const std::vector<Formula>& base, std::size_t d, std::size_t mu) {
    EpistemicAction a{name, {}};
    for (const Formula& phi : base)
      for (bool delta : {true, false})
        for (bool eps : {true, false}) a.feedbacks.push_back(phi & literal(d, delta) & literal(mu, eps));
    p.epistemic.push_back(std::move(a));
  };
  for (std::size_t i = 0; i < n; ++i) {
    const EpistemicAction& a = ordered.epistemic[ordered.action(ordered.order[i]).index];
    variant(a.name + "_p", a.feedbacks, fv[i].p, fv[i].mp);
    variant(a.name + "_n", a.feedbacks, fv[i].n, fv[i].mn);
    variant(a.name + "_pbar", {Formula::truth()}, fv[i].p, fv[i].mpb);
    variant(a.name + "_nbar", {Formula::truth()}, fv[i].n, fv[i].mnb);
  }
  for (const auto& a : p.epistemic)
    if (ordered.find_action(a.name) || std::count_if(p.epistemic.begin(), p.epistemic.end(),
                                                     [&](const auto& b) { return b.name == a.name; }) > 1)
      throw ValidationError("action name clash: " + a.name);

  std::vector<Formula> goal{ordered.goal};
  auto v = [](std::size_t i) { return Formula::var(i); };
  for (std::size_t i = 1; i < n; ++i) {
    goal.push_back(Formula::implication(K(v(fv[i - 1].p)) | K(!v(fv[i - 1].n)), knows_value(fv[i].p)));
    goal.push_back(Formula::implication(K(!v(fv[i - 1].p)) | K(v(fv[i - 1].n)), knows_value(fv[i].n)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> mus{fv[i].mp, fv[i].mn, fv[i].mpb, fv[i].mnb};
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) {
        if (a == b) continue;
        Formula ka = K(v(mus[a])), kb = K(v(mus[b]));
        if (mutex == MutexReading::kAsPrinted) {
          goal.push_back(((!ka) & (!kb)) | ((!ka) & (!kb)));
        } else {
          goal.push_back(((!ka) & (!K(!v(mus[a])))) | ((!kb) & (!K(!v(mus[b])))));
        }
      }
  }
  p.goal = to_sknnf(conj(goal));
  p.notes.push_back("ordered epistemic problem with the order enforced by its goal");
  certify(out, "solvable iff the ordered problem is solvable under its order");
  return out;
}

ReductionOutput reduce_qbf3_bounded(const Qbf& psi) {
  auto blocks = match_prefix(psi, "EAE");
  ReductionOutput out;
  PlanningProblem& p = out.problem;
  p.variables = psi.variables;
  std::vector<std::size_t> a = blocks[0], b = blocks[1], c = blocks[2];
  for (std::size_t i = 1; a.size() < b.size(); ++i) a.push_back(declare_fresh(p.variables, "pad_a" + std::to_string(i)));
  for (std::size_t i = 1; b.size() < a.size(); ++i) b.push_back(declare_fresh(p.variables, "pad_b" + std::to_string(i)));
  const std::size_t n = a.size(), q = c.size();
  const std::vector<std::size_t> ac = concat(a, c);
  const std::vector<std::size_t> abc = concat(concat(a, b), c);
  p.init = Formula::truth();
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i + 1);
    p.ontic.push_back({"alpha" + s + "_pos", Formula::primed(a[i]) & frame_except(ac, a[i])});
    p.ontic.push_back({"alpha" + s + "_neg", (!Formula::primed(a[i])) & frame_except(ac, a[i])});
  }
  for (std::size_t j = 0; j < q; ++j) {
    std::string s = std::to_string(j + 1);
    p.ontic.push_back({"gamma" + s + "_pos", Formula::primed(c[j]) & frame_except(abc, c[j])});
    p.ontic.push_back({"gamma" + s + "_neg", (!Formula::primed(c[j])) & frame_except(abc, c[j])});
  }
  for (std::size_t i = 0; i < n; ++i)
    p.epistemic.push_back(make_test_action("test" + std::to_string(i + 1),
                                           Formula::equivalence(Formula::var(a[i]), Formula::var(b[i]))));
  std::vector<Formula> goal{K(psi.matrix)};
  for (std::size_t v : b) goal.push_back(knows_value(v));
  p.goal = conj(goal);
  for (std::size_t v : c) p.vocabulary.push_back(K(Formula::implication(psi.matrix, Formula::var(v))));
  p.bound = 2 * n + (formula_size(psi.matrix) + 5) * q;
  out.vocabulary_sufficient = true;
  p.notes.push_back("exists-forall-exists QBF as bounded while-free plan existence");

  if (auto w = find_outer_witness(psi.matrix, blocks[0], blocks[1], blocks[2])) {
    std::vector<Kbp> plan;
    for (std::size_t i = 0; i < n; ++i) {
      bool value = i < blocks[0].size() ? ((*w >> i) & 1) : true;
      plan.push_back(Kbp::act("alpha" + std::to_string(i + 1) + (value ? "_pos" : "_neg")));
    }
    for (std::size_t i = 0; i < n; ++i) plan.push_back(Kbp::act("test" + std::to_string(i + 1)));
    for (std::size_t j = 0; j < q; ++j) {
      std::string s = std::to_string(j + 1);
      plan.push_back(Kbp::branch(p.vocabulary[j], Kbp::act("gamma" + s + "_pos"), Kbp::act("gamma" + s + "_neg")));
    }
    out.plan = sequence(plan);
  }
  certify(out, "a plan of size <= bound exists iff the QBF is true; bound = 2n + (|phi| + 5)q");
  return out;
}

ReductionOutput reduce_qbf2_bounded_pos(const Qbf& psi) {
  auto blocks = match_prefix(psi, "EA");
  ReductionOutput out;
  PlanningProblem& p = out.problem;
  p.variables = psi.variables;
  const std::vector<std::size_t>& a = blocks[0];
  const std::size_t n = a.size();
  const std::size_t c = declare_fresh(p.variables, "c");
  std::vector<std::size_t> d;
  for (std::size_t i = 1; i <= n; ++i) d.push_back(declare_fresh(p.variables, "d" + std::to_string(i)));
  const Formula C = Formula::var(c);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i + 1);
    for (bool positive : {true, false}) {
      Formula ai = literal(a[i], positive);
      Formula di = Formula::var(d[i]);
      p.epistemic.push_back({(positive ? "alpha" : "beta") + s,
                             {Formula::implication(C, ai) & di, Formula::implication(C, ai) & (!di),
                              C & (!ai) & di, C & (!ai) & (!di)}});
    }
  }
  std::vector<Formula> goal;
  for (std::size_t v : d) goal.push_back(knows_value(v));
  goal.push_back(K(C) | K(Formula::implication(C, psi.matrix)));
  p.init = Formula::truth();
  p.goal = conj(goal);
  p.bound = n;
  p.notes.push_back("exists-forall QBF as bounded epistemic plan existence with a positive goal");
  if (auto w = find_outer_witness(psi.matrix, a, blocks[1], {})) {
    std::vector<Kbp> plan;
    for (std::size_t i = 0; i < n; ++i)
      plan.push_back(Kbp::act(((*w >> i) & 1 ? "alpha" : "beta") + std::to_string(i + 1)));
    out.plan = sequence(plan);
  }
  certify(out, "a plan of size <= n exists iff the QBF is true");
  return out;
}

std::size_t literal_bits(std::size_t nvars) {
  std::size_t bits = 1;
  while ((std::size_t{1} << bits) < 2 * nvars) ++bits;
  return bits;
}

Formula encoded_literal(std::size_t value, std::size_t nvars) {
  if (value < nvars) return Formula::var(value);
  if (value < 2 * nvars) return !Formula::var(value - nvars);
  return Formula::truth();
}

ReductionOutput gen_3sat_family(std::size_t nvars, std::size_t nclauses) {
  if (nvars == 0 || nclauses == 0) throw ContractViolation("gen_3sat_family needs n >= 1 and clauses >= 1");
  const std::size_t bits = literal_bits(nvars);
  if (nvars + 3 * nclauses * bits + 1 > kMaxVariables)
    throw LimitExceeded("3SAT family instance needs more than 64 variables");
  ReductionOutput out;
  PlanningProblem& p = out.problem;
  for (std::size_t i = 1; i <= nvars; ++i) p.variables.declare("x" + std::to_string(i));
  std::vector<std::vector<std::vector<std::size_t>>> slot(nclauses, std::vector<std::vector<std::size_t>>(3));
  for (std::size_t i = 0; i < nclauses; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < bits; ++k)
        slot[i][j].push_back(p.variables.declare("l" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + "_" +
                                                 std::to_string(k + 1)));
  const std::size_t s = p.variables.declare("s");

  std::vector<Formula> chi;
  for (std::size_t i = 0; i < nclauses; ++i) {
    std::vector<Formula> lits;
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<Formula> cases;
      for (std::size_t value = 0; value < (std::size_t{1} << bits); ++value) {
        std::vector<Formula> eq;
        for (std::size_t k = 0; k < bits; ++k) eq.push_back(literal(slot[i][j][k], (value >> (bits - 1 - k)) & 1));
        cases.push_back(conj(eq) & encoded_literal(value, nvars));
      }
      lits.push_back(disj(cases));
    }
    chi.push_back(disj(lits));
  }
  const Formula phi = conj(chi);
  std::vector<Formula> init;
  for (const Formula& c : chi) init.push_back(Formula::implication(!c, !Formula::var(s)));
  p.init = conj(init);
  p.goal = K(!Formula::var(s)) | K(phi);

  std::vector<std::size_t> all(p.nvars());
  for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
  for (std::size_t i = 0; i < nvars; ++i) {
    std::string name = "x" + std::to_string(i + 1);
    p.ontic.push_back({name + "_pos", Formula::primed(i) & frame_except(all, i)});
    p.ontic.push_back({name + "_neg", (!Formula::primed(i)) & frame_except(all, i)});
  }
  std::vector<Kbp> plan;
  for (std::size_t i = 0; i < nclauses; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t v : slot[i][j]) {
        p.epistemic.push_back(make_test_action("test_" + p.variables.name(v), Formula::var(v)));
        plan.push_back(Kbp::act(p.epistemic.back().name));
      }
  std::vector<Kbp> build;
  for (std::size_t i = 0; i < nvars; ++i) {
    std::string name = "x" + std::to_string(i + 1);
    build.push_back(Kbp::branch(K(!(phi & Formula::var(i))), Kbp::act(name + "_neg"), Kbp::act(name + "_pos")));
  }
  plan.push_back(Kbp::branch(K(!Formula::var(s)), Kbp::empty(), sequence(build)));
  out.plan = sequence(plan);
  p.notes.push_back("3SAT family n=" + std::to_string(nvars) + " clauses=" + std::to_string(nclauses) +
                    " bits=" + std::to_string(bits));
  certify(out, "the plan reads the formula and ends with K(!s) iff it is unsatisfiable, else with a model");
  return out;
}

// ---------------------------------------------------------------------------
// Program-to-problem gadget.

namespace {

struct Item;
using Block = std::vector<Item>;

struct Item {
  enum class Kind : std::uint8_t { kOntic, kEpistemic, kIf, kWhile } kind;
  std::optional<ActionRef> base;  // nullopt for void actions
  Formula atom;                   // kIf / kWhile: condition K(atom)
  bool negated = false;           // kWhile: condition !K(atom)
  Block first, second;            // then / else, or body
};

Item ontic_item(std::optional<ActionRef> base = std::nullopt) {
  return Item{Item::Kind::kOntic, base, {}, false, {}, {}};
}
Item epistemic_item(std::optional<ActionRef> base = std::nullopt) {
  return Item{Item::Kind::kEpistemic, base, {}, false, {}, {}};
}

void flatten(const Kbp& pi, Block& out);

// Branching on an SKNNF condition, reduced to nested single-atom branches.
void branch_on(const Formula& c, const Block& yes, const Block& no, Block& out) {
  switch (c.op()) {
    case Connective::kTrue: out.insert(out.end(), yes.begin(), yes.end()); return;
    case Connective::kFalse: out.insert(out.end(), no.begin(), no.end()); return;
    case Connective::kKnow: out.push_back(Item{Item::Kind::kIf, {}, c.lhs(), false, yes, no}); return;
    case Connective::kNot: out.push_back(Item{Item::Kind::kIf, {}, c.lhs().lhs(), false, no, yes}); return;
    case Connective::kAnd: {
      Block inner;
      branch_on(c.rhs(), yes, no, inner);
      branch_on(c.lhs(), inner, no, out);
      return;
    }
    case Connective::kOr: {
      Block inner;
      branch_on(c.rhs(), yes, no, inner);
      branch_on(c.lhs(), yes, inner, out);
      return;
    }
    default: throw ValidationError("branching condition is not in SKNNF");
  }
}

void flatten(const Kbp& pi, Block& out) {
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty: return;
    case Kbp::Kind::kAct:
      out.push_back(pi.ref()->kind == ActionKind::kOntic ? ontic_item(*pi.ref()) : epistemic_item(*pi.ref()));
      return;
    case Kbp::Kind::kSeq:
      flatten(pi.first(), out);
      flatten(pi.second(), out);
      return;
    case Kbp::Kind::kIf: {
      Block yes, no;
      flatten(pi.then_branch(), yes);
      flatten(pi.else_branch(), no);
      branch_on(pi.condition(), yes, no, out);
      return;
    }
    case Kbp::Kind::kWhile: {
      const Formula& c = pi.condition();
      Item w{Item::Kind::kWhile, {}, {}, false, {}, {}};
      if (c.op() == Connective::kKnow) {
        w.atom = c.lhs();
      } else if (c.op() == Connective::kNot && c.lhs().op() == Connective::kKnow) {
        w.atom = c.lhs().lhs();
        w.negated = true;
      } else {
        throw ValidationError("while condition must be K(phi) or !K(phi)");
      }
      flatten(pi.body(), w.first);
      out.push_back(std::move(w));
      return;
    }
  }
}

// Starts and ends with an ontic action; ontic actions alternate with single
// epistemic actions or compound statements.
Block normalize(const Block& raw) {
  Block out;
  auto is_ontic = [](const Item& it) { return it.kind == Item::Kind::kOntic; };
  for (const Item& it : raw) {
    Item copy = it;
    if (copy.kind == Item::Kind::kIf) {
      copy.first = normalize(copy.first);
      copy.second = normalize(copy.second);
    } else if (copy.kind == Item::Kind::kWhile) {
      copy.first = normalize(copy.first);
    }
    if (out.empty()) {
      if (!is_ontic(copy)) out.push_back(ontic_item());
    } else if (is_ontic(out.back()) && is_ontic(copy)) {
      out.push_back(epistemic_item());
    } else if (!is_ontic(out.back()) && !is_ontic(copy)) {
      out.push_back(ontic_item());
    }
    out.push_back(std::move(copy));
  }
  if (out.empty() || !is_ontic(out.back())) out.push_back(ontic_item());
  return out;
}

struct Gadget {
  Gadget(const PlanningProblem& b, const std::set<std::size_t>& d) : base(b), dropped(d) {}

  const PlanningProblem& base;
  const std::set<std::size_t>& dropped;  // branch points without f
  PlanningProblem p;
  std::size_t ok = 0, s = 0, stop = 0;
  std::vector<std::size_t> rs;         // every ready variable
  std::vector<std::size_t> flags;      // f per branch point (kNoFlag if dropped)
  std::vector<Formula> atoms;          // condition atom per branch point
  std::vector<std::size_t> bp_ready;   // r per branch point
  std::vector<std::string> bp_label;
  std::size_t occurrences = 0;

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Gate {
    enum class Kind : std::uint8_t { kReady, kP, kThen, kElse } kind;
    std::size_t var;  // ready or p variable, or branch point index
  };

  std::size_t new_ready() {
    std::size_t r = declare_fresh(p.variables, "_r" + std::to_string(rs.size() + 1));
    rs.push_back(r);
    return r;
  }

  std::string occurrence_name(const std::optional<ActionRef>& ref) {
    ++occurrences;
    std::string stem = ref ? base.action_name(*ref) : std::string("_void");
    std::string name = stem + "__" + std::to_string(occurrences);
    if (base.find_action(name)) throw ValidationError("action name clash: " + name);
    return name;
  }

  std::vector<std::size_t> base_vars() const {
    std::vector<std::size_t> v(base.nvars());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
  }

  // Theory shared by every copy of one ontic occurrence.
  Formula ontic_theory(const std::optional<ActionRef>& ref, const Gate& gate, std::size_t readies,
                       std::optional<bool> p_value) {
    std::vector<Formula> t;
    if (ref) {
      t.push_back(base.ontic[ref->index].theory);
    } else {
      auto x = base_vars();
      t.push_back(frame_axioms(x));
    }
    t.push_back(frame_axioms(std::vector<std::size_t>{s}));
    for (std::size_t r : rs) t.push_back(r == readies ? Formula::primed(r) : !Formula::primed(r));
    t.push_back(readies == kNone ? Formula::primed(stop) : frame_axioms(std::vector<std::size_t>{stop}));
    const Formula live = Formula::var(ok) & !Formula::var(stop);
    Formula cond;
    std::size_t own_flag = kNone, own_p = kNone;
    switch (gate.kind) {
      case Gate::Kind::kReady: cond = Formula::var(gate.var); break;
      case Gate::Kind::kP:
        cond = literal(gate.var, *p_value);
        own_p = gate.var;
        break;
      case Gate::Kind::kThen: cond = Formula::var(bp_ready[gate.var]) & atoms[gate.var]; break;
      case Gate::Kind::kElse:
        cond = Formula::var(bp_ready[gate.var]);
        if (flags[gate.var] != kNone) {
          own_flag = flags[gate.var];
          Formula f = Formula::var(own_flag);
          t.push_back(Formula::equivalence(Formula::primed(own_flag), f | atoms[gate.var]));
        }
        break;
    }
    t.push_back(Formula::equivalence(Formula::primed(ok), live & cond));
    for (std::size_t f : flags)
      if (f != kNone && f != own_flag) t.push_back(frame_axioms(std::vector<std::size_t>{f}));
    for (std::size_t pv : pvars)
      if (pv != own_p) t.push_back(frame_axioms(std::vector<std::size_t>{pv}));
    return conj(t);
  }

  std::vector<std::size_t> pvars;

  // Deferred action construction: theories need the full variable set.
  struct OnticOcc {
    std::optional<ActionRef> ref;
    Gate gate;
    std::size_t readies;
    std::string name;
  };
  struct EpistemicOcc {
    std::optional<ActionRef> ref;
    std::size_t ready, p;
    std::string name;
  };
  std::vector<OnticOcc> ontic_occ;
  std::vector<EpistemicOcc> epistemic_occ;

  // Allocates variables for `block` and returns its plan.
  Kbp build(const Block& block, Gate first_gate, std::size_t exit_readies) {
    // Ready variable each position waits on, where it has one.
    std::vector<std::size_t> ready(block.size(), kNone);
    std::vector<std::size_t> bp(block.size(), kNone);
    std::vector<std::optional<Gate>> gates(block.size());
    gates[0] = first_gate;
    for (std::size_t i = 0; i < block.size(); ++i) {
      const Item& it = block[i];
      if (it.kind == Item::Kind::kEpistemic) {
        ready[i] = new_ready();
        std::size_t pv = declare_fresh(p.variables, "_p" + std::to_string(pvars.size() + 1));
        pvars.push_back(pv);
        gates[i + 1] = Gate{Gate::Kind::kP, pv};
      } else if (it.kind == Item::Kind::kIf || it.kind == Item::Kind::kWhile) {
        bp[i] = atoms.size();
        ready[i] = new_ready();
        bp_ready.push_back(ready[i]);
        atoms.push_back(it.atom);
        bp_label.push_back((it.kind == Item::Kind::kIf ? "if K(" : "while K(") + to_string(it.atom, p.variables) + ")");
        flags.push_back(dropped.count(bp[i]) ? kNone : declare_fresh(p.variables, "_f" + std::to_string(bp[i] + 1)));
        if (it.kind == Item::Kind::kIf) {
          ready[i + 1] = new_ready();
          gates[i + 1] = Gate{Gate::Kind::kReady, ready[i + 1]};
        } else {
          gates[i + 1] = Gate{it.negated ? Gate::Kind::kThen : Gate::Kind::kElse, bp[i]};
        }
      }
    }
    std::vector<Kbp> parts;
    for (std::size_t i = 0; i < block.size(); ++i) {
      const Item& it = block[i];
      switch (it.kind) {
        case Item::Kind::kOntic: {
          std::size_t readies = i + 1 < block.size() ? ready[i + 1] : exit_readies;
          OnticOcc occ{it.base, *gates[i], readies, occurrence_name(it.base)};
          if (occ.gate.kind == Gate::Kind::kP) {
            parts.push_back(Kbp::branch(K(Formula::var(occ.gate.var)), Kbp::act(occ.name + "_p"),
                                        Kbp::act(occ.name + "_np")));
          } else {
            parts.push_back(Kbp::act(occ.name));
          }
          ontic_occ.push_back(std::move(occ));
          break;
        }
        case Item::Kind::kEpistemic: {
          EpistemicOcc occ{it.base, ready[i], gates[i + 1]->var, occurrence_name(it.base)};
          parts.push_back(Kbp::act(occ.name));
          epistemic_occ.push_back(std::move(occ));
          break;
        }
        case Item::Kind::kIf: {
          Kbp yes = build(it.first, Gate{Gate::Kind::kThen, bp[i]}, ready[i + 1]);
          Kbp no = build(it.second, Gate{Gate::Kind::kElse, bp[i]}, ready[i + 1]);
          parts.push_back(Kbp::branch(K(it.atom), yes, no));
          break;
        }
        case Item::Kind::kWhile: {
          Gate body_gate{it.negated ? Gate::Kind::kElse : Gate::Kind::kThen, bp[i]};
          Kbp body = build(it.first, body_gate, ready[i]);
          Formula cond = it.negated ? !K(it.atom) : K(it.atom);
          parts.push_back(Kbp::loop(cond, body));
          break;
        }
      }
    }
    return sequence(parts);
  }

  Kbp run(const Kbp& pi) {
    p.variables = base.variables;
    ok = declare_fresh(p.variables, "_ok");
    s = declare_fresh(p.variables, "_s");
    stop = declare_fresh(p.variables, "_stop");
    Block raw;
    flatten(pi, raw);
    Block block = normalize(raw);
    std::size_t first = new_ready();
    Kbp plan = build(block, Gate{Gate::Kind::kReady, first}, kNone);

    if (p.nvars() > kMaxVariables) throw LimitExceeded("program gadget needs more than 64 variables");
    for (const OnticOcc& occ : ontic_occ) {
      if (occ.gate.kind == Gate::Kind::kP) {
        p.ontic.push_back({occ.name + "_p", ontic_theory(occ.ref, occ.gate, occ.readies, true)});
        p.ontic.push_back({occ.name + "_np", ontic_theory(occ.ref, occ.gate, occ.readies, false)});
      } else {
        p.ontic.push_back({occ.name, ontic_theory(occ.ref, occ.gate, occ.readies, std::nullopt)});
      }
    }
    for (const EpistemicOcc& occ : epistemic_occ) {
      std::vector<Formula> guard{Formula::var(stop)};
      for (std::size_t r : rs)
        if (r != occ.ready) guard.push_back(Formula::var(r));
      const Formula g = disj(guard);
      std::vector<Formula> base_fb =
          occ.ref ? base.epistemic[occ.ref->index].feedbacks : std::vector<Formula>{Formula::truth()};
      EpistemicAction a{occ.name, {}};
      for (const Formula& phi : base_fb)
        for (bool eps : {true, false})
          for (bool eps2 : {true, false})
            a.feedbacks.push_back(phi & Formula::implication(g, literal(s, eps)) &
                                  Formula::implication(Formula::var(occ.ready), literal(occ.p, eps2)));
      p.epistemic.push_back(std::move(a));
    }

    std::vector<Formula> init{base.init, Formula::var(ok), !Formula::var(stop)};
    for (std::size_t r : rs) init.push_back(literal(r, r == first));
    for (std::size_t f : flags)
      if (f != kNone) init.push_back(!Formula::var(f));
    p.init = conj(init);
    std::vector<Formula> goal{base.goal, K(Formula::var(ok)), !K(Formula::var(s)), !K(!Formula::var(s)),
                              K(Formula::var(stop))};
    for (std::size_t f : flags)
      if (f != kNone) goal.push_back(!K(Formula::var(f)));
    p.goal = to_sknnf(conj(goal));
    return link(plan, p);
  }
};

}  // namespace

ReductionOutput problem_from_kbp(const PlanningProblem& base, const Kbp& pi, GadgetInfo* info) {
  validate_problem(base);
  const Kbp linked = link(pi, base);
  {
    PlanningProblem trivial = base;
    trivial.goal = K(Formula::truth());
    Verdict v = verify_plan(trivial, linked);
    if (v.kind == Verdict::Kind::kNonTerminating) throw ValidationError("program does not terminate from init");
  }
  std::set<std::size_t> dropped;
  for (;;) {
    Gadget g(base, dropped);
    Kbp plan = g.run(linked);
    Verdict v = verify_plan(g.p, plan);
    std::vector<std::size_t> culprits;
    if (!v.valid() && v.trace) {
      const KnowledgeState& last = v.trace->states.back();
      for (std::size_t i = 0; i < g.flags.size(); ++i)
        if (g.flags[i] != Gadget::kNone && holds(last, K(Formula::var(g.flags[i])))) culprits.push_back(i);
    }
    if (!v.valid() && culprits.empty()) {
      // The base goal may simply not hold after pi.
      PlanningProblem check = g.p;
      check.goal = base.goal;
      if (!verify_plan(check, plan).valid()) throw ValidationError("program is not valid for the base problem");
      throw Error("program gadget failed to validate its own plan");
    }
    if (!v.valid()) {
      dropped.insert(culprits.begin(), culprits.end());
      continue;
    }
    ReductionOutput out;
    out.problem = std::move(g.p);
    out.plan = plan;
    out.problem.notes = base.notes;
    out.problem.notes.push_back("program gadget: valid plans follow the given program");
    std::string note = std::to_string(g.atoms.size()) + " branch points";
    if (!dropped.empty()) {
      note += "; f dropped at";
      for (std::size_t i : dropped) note += " " + g.bp_label[i];
    }
    out.problem.notes.push_back(note);
    if (info) {
      info->branch_points = g.atoms.size();
      info->forbidden_flags = g.atoms.size() - dropped.size();
      info->dropped_flags.clear();
      for (std::size_t i : dropped) info->dropped_flags.push_back(g.bp_label[i]);
    }
    certify(out, "the emitted plan is valid; other valid plans coincide with it up to void steps");
    return out;
  }
}

}  // namespace kbp
