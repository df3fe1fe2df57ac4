#include "kbpkit/planner.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "kbpkit/compiler.hpp"
#include "kbpkit/error.hpp"
#include "kbpkit/logic.hpp"
#include "kbpkit/semantics.hpp"

namespace kbp {

ExistenceAnswer ExistenceAnswer::found(Kbp witness, std::size_t explored) {
  ExistenceAnswer a;
  a.kind = Kind::kExists;
  a.witness = std::move(witness);
  a.explored = explored;
  return a;
}

ExistenceAnswer ExistenceAnswer::none(std::size_t explored) {
  ExistenceAnswer a;
  a.kind = Kind::kNone;
  a.explored = explored;
  return a;
}

ExistenceAnswer ExistenceAnswer::unknown(std::string reason, std::size_t explored) {
  ExistenceAnswer a;
  a.kind = Kind::kUnknown;
  a.reason = std::move(reason);
  a.explored = explored;
  return a;
}

const char* to_string(ExistenceAnswer::Kind kind) {
  switch (kind) {
    case ExistenceAnswer::Kind::kExists:
      return "exists";
    case ExistenceAnswer::Kind::kNone:
      return "none";
    case ExistenceAnswer::Kind::kUnknown:
      return "unknown";
  }
  return "?";
}

namespace {

std::vector<ActionRef> all_actions(const PlanningProblem& problem) {
  std::vector<ActionRef> refs;
  for (std::size_t i = 0; i < problem.ontic.size(); ++i) refs.push_back({ActionKind::kOntic, i});
  for (std::size_t i = 0; i < problem.epistemic.size(); ++i) refs.push_back({ActionKind::kEpistemic, i});
  return refs;
}

Kbp act_node(const PlanningProblem& problem, ActionRef ref) {
  return Kbp::act(problem.action_name(ref), ref);
}

void require_epistemic_only(const PlanningProblem& problem, const char* who) {
  if (!problem.ontic.empty()) throw ContractViolation(std::string(who) + ": problem has ontic actions");
}

// Cascade over the branches of an epistemic action; sub(i, M_i) gives the
// policy for one branch, or nullopt to abandon.
template <typename Sub>
std::optional<Kbp> cascade_with(const PlanningProblem& problem, ActionRef ref,
                                const std::vector<std::pair<std::size_t, KnowledgeState>>& branches, Sub sub) {
  const auto order = cascade_order(branches);
  std::vector<Kbp> subs;
  for (std::size_t idx : order) {
    for (const auto& [i, m] : branches) {
      if (i != idx) continue;
      auto s = sub(m);
      if (!s) return std::nullopt;
      subs.push_back(*s);
      break;
    }
  }
  return feedback_cascade(act_node(problem, ref), problem.epistemic[ref.index], order, subs);
}

// Removes branches whose progressed state equals an earlier one.
std::vector<std::pair<std::size_t, KnowledgeState>> distinct(
    std::vector<std::pair<std::size_t, KnowledgeState>> branches) {
  std::vector<std::pair<std::size_t, KnowledgeState>> out;
  for (auto& b : branches) {
    bool seen = false;
    for (const auto& o : out) seen = seen || o.second == b.second;
    if (!seen) out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::size_t, KnowledgeState>> action_successors(const PlanningProblem& problem,
                                                                      const KnowledgeState& m, ActionRef a) {
  std::vector<std::pair<std::size_t, KnowledgeState>> out;
  if (a.kind == ActionKind::kOntic) {
    out.emplace_back(0, progress_ontic(m, problem.ontic[a.index], problem.nvars()));
    return out;
  }
  const auto& e = problem.epistemic[a.index];
  for (std::size_t i = 0; i < e.feedbacks.size(); ++i) {
    if (auto next = progress_feedback(m, e, i)) out.emplace_back(i, std::move(*next));
  }
  return out;
}

// --- fixpoint ---------------------------------------------------------------

SolvabilityTable SolvabilityTable::build(const PlanningProblem& problem, const PlannerLimits& limits) {
  SolvabilityTable table;
  table.initial_ = problem.initial_state();
  if (table.initial_.empty()) throw ValidationError("initial knowledge state is empty");
  const auto actions = all_actions(problem);

  std::vector<KnowledgeState> states;
  std::unordered_map<KnowledgeState, std::size_t, KnowledgeStateHash> index;
  std::vector<std::vector<std::vector<std::size_t>>> succ;  // [state][action] -> successor ids
  auto intern = [&](const KnowledgeState& m) {
    auto [it, inserted] = index.emplace(m, states.size());
    if (inserted) {
      if (states.size() >= limits.max_states) throw LimitExceeded("fixpoint: reachable state limit exceeded");
      states.push_back(m);
    }
    return it->second;
  };
  intern(table.initial_);
  for (std::size_t i = 0; i < states.size(); ++i) {
    std::vector<std::vector<std::size_t>> row;
    for (ActionRef a : actions) {
      std::vector<std::size_t> ids;
      for (auto& [f, m] : action_successors(problem, states[i], a)) {
        const std::size_t id = intern(m);
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
      }
      row.push_back(std::move(ids));
    }
    succ.push_back(std::move(row));
  }

  std::vector<std::size_t> rank(states.size(), kUnsolvable);
  std::vector<std::optional<ActionRef>> choice(states.size());
  std::size_t solved = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (holds(states[i], problem.goal)) {
      rank[i] = 0;
      ++solved;
    }
  }
  table.rounds_.push_back(solved);
  for (std::size_t t = 0;; ++t) {
    std::vector<std::pair<std::size_t, ActionRef>> fresh;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (rank[i] != kUnsolvable) continue;
      std::size_t best = kUnsolvable;
      std::optional<ActionRef> best_action;
      for (std::size_t a = 0; a < actions.size(); ++a) {
        std::size_t worst = 0;
        for (std::size_t j : succ[i][a]) worst = std::max(worst, rank[j]);
        if (worst <= t && worst < best) {
          best = worst;
          best_action = actions[a];
        }
      }
      if (best_action) fresh.emplace_back(i, *best_action);
    }
    if (fresh.empty()) break;
    for (auto [i, a] : fresh) {
      rank[i] = t + 1;
      choice[i] = a;
    }
    solved += fresh.size();
    table.rounds_.push_back(solved);
  }
  for (std::size_t i = 0; i < states.size(); ++i) table.entries_.emplace(states[i], Entry{rank[i], choice[i]});
  return table;
}

const SolvabilityTable::Entry* SolvabilityTable::find(const KnowledgeState& m) const {
  auto it = entries_.find(m);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t SolvabilityTable::rank(const KnowledgeState& m) const {
  const Entry* e = find(m);
  return e ? e->rank : kUnsolvable;
}

Kbp SolvabilityTable::extract(const PlanningProblem& problem, const KnowledgeState& m) const {
  std::unordered_map<KnowledgeState, Kbp, KnowledgeStateHash> memo;
  std::function<Kbp(const KnowledgeState&)> go = [&](const KnowledgeState& s) -> Kbp {
    if (auto it = memo.find(s); it != memo.end()) return it->second;
    const Entry* e = find(s);
    if (e == nullptr || e->rank == kUnsolvable) throw ContractViolation("extract: unsolvable state");
    Kbp out;
    if (e->rank > 0) {
      const ActionRef ref = *e->action;
      auto branches = action_successors(problem, s, ref);
      if (ref.kind == ActionKind::kOntic) {
        Kbp rest = go(branches.front().second);
        out = rest.is_empty() ? act_node(problem, ref) : Kbp::seq(act_node(problem, ref), rest);
      } else {
        out = *cascade_with(problem, ref, branches, [&](const KnowledgeState& next) { return std::optional(go(next)); });
      }
    }
    memo.emplace(s, out);
    return out;
  };
  return go(m);
}

ExistenceAnswer solve_existence(const PlanningProblem& problem, const PlannerLimits& limits) {
  SolvabilityTable table;
  try {
    table = SolvabilityTable::build(problem, limits);
  } catch (const LimitExceeded& e) {
    return ExistenceAnswer::unknown(std::string("resource: ") + e.what(), limits.max_states);
  }
  if (table.rank(table.initial()) == kUnsolvable) return ExistenceAnswer::none(table.size());
  return ExistenceAnswer::found(table.extract(problem, table.initial()), table.size());
}

// --- epistemic tree searches -------------------------------------------------

namespace {

// Depth-first search over epistemic trees. `allowed(last_pos)` lists the
// action positions usable below a node whose parent used position last_pos.
class TreeSearch {
 public:
  TreeSearch(const PlanningProblem& problem, std::vector<ActionRef> actions, bool ordered,
             const PlannerLimits& limits)
      : problem_(problem), actions_(std::move(actions)), ordered_(ordered), limits_(limits) {
    if (actions_.size() > 64) throw LimitExceeded("tree search: more than 64 epistemic actions");
  }

  // `used` is a bit set of action positions for the unordered search; for the
  // ordered search it holds the first position still allowed.
  std::optional<Kbp> solve(const KnowledgeState& m, std::uint64_t used) {
    const Key key{m, used};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++nodes_ > limits_.max_nodes) throw LimitExceeded("tree search: node limit exceeded");
    std::optional<Kbp> result;
    if (holds(m, problem_.goal)) {
      result = Kbp::empty();
    } else {
      for (std::size_t p = ordered_ ? used : 0; p < actions_.size() && !result; ++p) {
        if (!ordered_ && (used >> p & 1)) continue;
        const std::uint64_t next_used = ordered_ ? p + 1 : used | (std::uint64_t{1} << p);
        auto branches = distinct(action_successors(problem_, m, actions_[p]));
        // A single unchanged branch gives no information.
        if (branches.size() == 1 && branches.front().second == m) continue;
        result = cascade_with(problem_, actions_[p], branches,
                              [&](const KnowledgeState& next) { return solve(next, next_used); });
      }
    }
    memo_.emplace(key, result);
    return result;
  }

  std::size_t nodes() const { return nodes_; }

 private:
  struct Key {
    KnowledgeState m;
    std::uint64_t used;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return k.m.hash() * 1000003u ^ k.used; }
  };

  const PlanningProblem& problem_;
  std::vector<ActionRef> actions_;
  bool ordered_;
  const PlannerLimits& limits_;
  std::size_t nodes_ = 0;
  std::unordered_map<Key, std::optional<Kbp>, KeyHash> memo_;
};

ExistenceAnswer run_tree_search(TreeSearch& search, const KnowledgeState& init) {
  try {
    auto plan = search.solve(init, 0);
    if (!plan) return ExistenceAnswer::none(search.nodes());
    return ExistenceAnswer::found(*plan, search.nodes());
  } catch (const LimitExceeded& e) {
    return ExistenceAnswer::unknown(std::string("resource: ") + e.what(), search.nodes());
  }
}

}  // namespace

ExistenceAnswer solve_existence_epistemic(const PlanningProblem& problem, const PlannerLimits& limits) {
  require_epistemic_only(problem, "solve_existence_epistemic");
  TreeSearch search(problem, all_actions(problem), false, limits);
  return run_tree_search(search, problem.initial_state());
}

ExistenceAnswer solve_wfoe(const PlanningProblem& problem, const std::vector<std::string>& order,
                           const PlannerLimits& limits) {
  require_epistemic_only(problem, "solve_wfoe");
  std::vector<ActionRef> refs;
  std::set<std::size_t> seen;
  for (const auto& name : order) {
    const ActionRef ref = problem.action(name);
    if (!seen.insert(ref.index).second) throw ValidationError("order lists '" + name + "' twice");
    refs.push_back(ref);
  }
  if (refs.size() != problem.epistemic.size()) throw ValidationError("order must list every epistemic action");
  TreeSearch search(problem, refs, true, limits);
  return run_tree_search(search, problem.initial_state());
}

// --- positive epistemic goals -------------------------------------------------

namespace {

// Positive SKNNF goal with each K(psi) decided by `know(psi)`.
template <typename Know>
bool eval_positive(const Formula& g, Know know) {
  switch (g.op()) {
    case Connective::kTrue:
      return true;
    case Connective::kFalse:
      return false;
    case Connective::kKnow:
      return know(g.lhs());
    case Connective::kAnd:
      return eval_positive(g.lhs(), know) && eval_positive(g.rhs(), know);
    case Connective::kOr:
      return eval_positive(g.lhs(), know) || eval_positive(g.rhs(), know);
    default:
      throw ContractViolation("goal is not a positive SKNNF formula");
  }
}

void require_positive(const PlanningProblem& problem, const char* who) {
  require_epistemic_only(problem, who);
  if (!is_positive(problem.goal)) throw ContractViolation(std::string(who) + ": goal is not positive");
}

}  // namespace

bool positive_sequence_entails_goal(const PlanningProblem& problem, const std::vector<std::size_t>& actions) {
  require_positive(problem, "positive_sequence_entails_goal");
  const std::size_t n = problem.nvars();
  std::function<bool(std::size_t, const Formula&)> go = [&](std::size_t depth, const Formula& context) {
    if (!satisfiable(context, n)) return true;  // not a trace
    if (depth == actions.size()) {
      return eval_positive(problem.goal, [&](const Formula& psi) { return entails(context, psi, n); });
    }
    for (const auto& phi : problem.epistemic[actions[depth]].feedbacks) {
      if (!go(depth + 1, context & phi)) return false;
    }
    return true;
  };
  return go(0, problem.init);
}

ExistenceAnswer solve_epistemic_positive(const PlanningProblem& problem, const PlannerLimits& limits) {
  require_positive(problem, "solve_epistemic_positive");
  std::vector<Kbp> steps;
  for (std::size_t i = 0; i < problem.epistemic.size(); ++i) {
    steps.push_back(act_node(problem, {ActionKind::kEpistemic, i}));
  }
  Kbp plan = sequence(steps);
  Limits l;
  l.max_configurations = limits.max_states;
  const Verdict v = verify_plan(problem, plan, l);
  if (v.valid()) return ExistenceAnswer::found(plan, v.configurations);
  return ExistenceAnswer::none(v.configurations);
}

// --- sequences ----------------------------------------------------------------

ExistenceAnswer solve_bounded_sequence(const PlanningProblem& problem, std::size_t k, const PlannerLimits& limits) {
  const KnowledgeState init = problem.initial_state();
  if (problem.epistemic.empty()) {
    // Ontic sequences are deterministic on knowledge states: breadth-first.
    std::unordered_map<KnowledgeState, std::pair<KnowledgeState, std::size_t>, KnowledgeStateHash> parent;
    std::deque<std::pair<KnowledgeState, std::size_t>> queue{{init, 0}};
    parent.emplace(init, std::make_pair(init, kUnsolvable));
    while (!queue.empty()) {
      auto [m, depth] = queue.front();
      queue.pop_front();
      if (holds(m, problem.goal)) {
        std::vector<Kbp> steps;
        for (KnowledgeState cur = m;;) {
          const auto& [prev, a] = parent.at(cur);
          if (a == kUnsolvable) break;
          steps.push_back(act_node(problem, {ActionKind::kOntic, a}));
          cur = prev;
        }
        std::reverse(steps.begin(), steps.end());
        return ExistenceAnswer::found(sequence(steps), parent.size());
      }
      if (depth == k) continue;
      for (std::size_t a = 0; a < problem.ontic.size(); ++a) {
        KnowledgeState next = progress_ontic(m, problem.ontic[a], problem.nvars());
        if (parent.contains(next)) continue;
        if (parent.size() >= limits.max_states) {
          return ExistenceAnswer::unknown("resource: sequence state limit exceeded", parent.size());
        }
        parent.emplace(next, std::make_pair(m, a));
        queue.emplace_back(std::move(next), depth + 1);
      }
    }
    return ExistenceAnswer::none(parent.size());
  }

  require_positive(problem, "solve_bounded_sequence");
  // Epistemic actions commute and repeating one adds nothing, so subsets in
  // increasing size cover every sequence of length at most k.
  const std::size_t m = problem.epistemic.size();
  std::size_t explored = 0;
  std::vector<std::size_t> chosen;
  std::function<std::optional<Kbp>(std::size_t, std::size_t)> pick = [&](std::size_t from,
                                                                         std::size_t size) -> std::optional<Kbp> {
    if (chosen.size() == size) {
      if (++explored > limits.max_nodes) throw LimitExceeded("sequence: candidate limit exceeded");
      if (!positive_sequence_entails_goal(problem, chosen)) return std::nullopt;
      std::vector<Kbp> steps;
      for (std::size_t a : chosen) steps.push_back(act_node(problem, {ActionKind::kEpistemic, a}));
      return sequence(steps);
    }
    for (std::size_t a = from; a < m; ++a) {
      chosen.push_back(a);
      auto r = pick(a + 1, size);
      chosen.pop_back();
      if (r) return r;
    }
    return std::nullopt;
  };
  try {
    for (std::size_t size = 0; size <= std::min(k, m); ++size) {
      if (auto plan = pick(0, size)) {
        if (!verify_plan(problem, *plan).valid()) {
          throw ContractViolation("solve_bounded_sequence: entailment check disagrees with verification");
        }
        return ExistenceAnswer::found(*plan, explored);
      }
    }
  } catch (const LimitExceeded& e) {
    return ExistenceAnswer::unknown(std::string("resource: ") + e.what(), explored);
  }
  return ExistenceAnswer::none(explored);
}

// --- bounded search over while-free KBPs ----------------------------------------

std::vector<Formula> default_vocabulary(const PlanningProblem& problem) {
  std::vector<Formula> out;
  auto add = [&](const Formula& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  for (std::size_t i = 0; i < problem.nvars(); ++i) {
    const Formula kx = Formula::know(Formula::var(i));
    const Formula knx = Formula::know(!Formula::var(i));
    add(kx);
    add(knx);
    add((!kx) & (!knx));
  }
  for (const auto& a : problem.epistemic) {
    for (const auto& phi : a.feedbacks) add(Formula::know(phi));
  }
  for (const auto& f : problem.vocabulary) add(f);
  return out;
}

namespace {

class BoundedSearch {
 public:
  BoundedSearch(const PlanningProblem& problem, const SolvabilityTable& table, const std::vector<Formula>& vocabulary,
                const PlannerLimits& limits)
      : problem_(problem), table_(table), vocabulary_(vocabulary), actions_(all_actions(problem)), limits_(limits) {
    for (const auto& c : vocabulary_) {
      if (!is_sknnf(c)) throw ValidationError("vocabulary condition is not in SKNNF");
      cost_.push_back(formula_size(c));
    }
  }

  std::optional<Kbp> run(std::size_t k) {
    Node root;
    root.frontier = {intern(table_.initial())};
    const std::size_t lb = rank_of(root.frontier[0]);
    for (std::size_t budget = lb; budget <= k; ++budget) {
      tokens_.clear();
      if (dfs(root, budget)) return build();
    }
    return std::nullopt;
  }

  std::size_t nodes() const { return nodes_; }

 private:
  using Id = std::uint32_t;
  using Set = std::vector<Id>;  // sorted
  struct Frame {
    bool in_else = false;
    Set pending;  // states taking the else branch
    Set done;     // states that finished the then branch
  };
  struct Node {
    Set frontier;
    std::vector<Frame> frames;
  };
  struct Token {
    enum class Kind : std::uint8_t { kAct, kIf, kElse, kEndif } kind;
    std::size_t index;  // action position or vocabulary index
  };

  Id intern(const KnowledgeState& m) {
    auto [it, inserted] = ids_.emplace(m, static_cast<Id>(states_.size()));
    if (inserted) {
      states_.push_back(m);
      ranks_.push_back(table_.rank(m));
      goal_.push_back(holds(m, problem_.goal) ? 1 : 0);
      succ_.emplace_back(actions_.size());
      cond_.emplace_back(vocabulary_.size(), -1);
    }
    return it->second;
  }

  std::size_t rank_of(Id id) const { return ranks_[id]; }

  const Set& successors(Id id, std::size_t a) {
    auto& slot = succ_[id][a];
    if (!slot) {
      Set out;
      const KnowledgeState m = states_[id];
      for (auto& [f, next] : action_successors(problem_, m, actions_[a])) out.push_back(intern(next));
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      succ_[id][a] = std::move(out);
    }
    return *succ_[id][a];
  }

  bool condition(Id id, std::size_t c) {
    auto& v = cond_[id][c];
    if (v < 0) v = holds(states_[id], vocabulary_[c]) ? 1 : 0;
    return v == 1;
  }

  static Set merge(const Set& a, const Set& b) {
    Set out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  std::size_t lower_bound(const Node& n) const {
    std::size_t lb = 0;
    auto scan = [&](const Set& s) {
      for (Id id : s) lb = std::max(lb, ranks_[id]);
    };
    scan(n.frontier);
    for (const auto& f : n.frames) {
      scan(f.pending);
      scan(f.done);
    }
    return lb;
  }

  static std::vector<Id> encode(const Node& n) {
    std::vector<Id> key(n.frontier);
    for (const auto& f : n.frames) {
      key.push_back(f.in_else ? 0xFFFFFFFEu : 0xFFFFFFFDu);
      key.insert(key.end(), f.pending.begin(), f.pending.end());
      key.push_back(0xFFFFFFFFu);
      key.insert(key.end(), f.done.begin(), f.done.end());
    }
    return key;
  }

  struct KeyHash {
    std::size_t operator()(const std::vector<Id>& v) const {
      std::size_t h = v.size();
      for (Id x : v) h = h * 1000003u ^ x;
      return h;
    }
  };

  bool dfs(const Node& n, std::size_t budget) {
    const std::size_t lb = lower_bound(n);
    if (lb == kUnsolvable || lb > budget) return false;
    if (n.frames.empty()) {
      bool all_goal = true;
      for (Id id : n.frontier) all_goal = all_goal && goal_[id];
      if (all_goal) return true;
    }
    auto key = encode(n);
    if (auto it = failed_.find(key); it != failed_.end() && it->second >= budget) return false;
    if (++nodes_ > limits_.max_nodes) throw LimitExceeded("bounded search: node limit exceeded");

    if (!n.frames.empty()) {
      const Frame& top = n.frames.back();
      Node next = n;
      if (!top.in_else) {
        next.frames.back().in_else = true;
        next.frames.back().done = n.frontier;
        next.frontier = top.pending;
        next.frames.back().pending.clear();
        tokens_.push_back({Token::Kind::kElse, 0});
      } else {
        next.frontier = merge(n.frontier, top.done);
        next.frames.pop_back();
        tokens_.push_back({Token::Kind::kEndif, 0});
      }
      if (dfs(next, budget)) return true;
      tokens_.pop_back();
    }

    if (budget >= 1) {
      for (std::size_t a = 0; a < actions_.size(); ++a) {
        Set out;
        for (Id id : n.frontier) out = merge(out, successors(id, a));
        if (out == n.frontier) continue;
        Node next = n;
        next.frontier = std::move(out);
        tokens_.push_back({Token::Kind::kAct, a});
        if (dfs(next, budget - 1)) return true;
        tokens_.pop_back();
      }
    }

    for (std::size_t c = 0; c < vocabulary_.size(); ++c) {
      if (cost_[c] > budget) continue;
      Set yes;
      Set no;
      for (Id id : n.frontier) (condition(id, c) ? yes : no).push_back(id);
      if (yes.empty() || no.empty()) continue;
      Node next = n;
      next.frontier = std::move(yes);
      next.frames.push_back({false, std::move(no), {}});
      tokens_.push_back({Token::Kind::kIf, c});
      if (dfs(next, budget - cost_[c])) return true;
      tokens_.pop_back();
    }

    auto& slot = failed_[std::move(key)];
    slot = std::max(slot, budget);
    return false;
  }

  Kbp build() const {
    std::size_t pos = 0;
    std::function<Kbp()> block = [&]() -> Kbp {
      std::vector<Kbp> parts;
      while (pos < tokens_.size()) {
        const Token t = tokens_[pos];
        if (t.kind == Token::Kind::kElse || t.kind == Token::Kind::kEndif) break;
        ++pos;
        if (t.kind == Token::Kind::kAct) {
          parts.push_back(act_node(problem_, actions_[t.index]));
          continue;
        }
        Kbp then_branch = block();
        Kbp else_branch;
        if (pos < tokens_.size() && tokens_[pos].kind == Token::Kind::kElse) {
          ++pos;
          else_branch = block();
        }
        if (pos < tokens_.size() && tokens_[pos].kind == Token::Kind::kEndif) ++pos;
        parts.push_back(Kbp::branch(vocabulary_[t.index], then_branch, else_branch));
      }
      return sequence(parts);
    };
    return block();
  }

  const PlanningProblem& problem_;
  const SolvabilityTable& table_;
  const std::vector<Formula>& vocabulary_;
  std::vector<ActionRef> actions_;
  const PlannerLimits& limits_;
  std::vector<std::size_t> cost_;

  std::vector<KnowledgeState> states_;
  std::unordered_map<KnowledgeState, Id, KnowledgeStateHash> ids_;
  std::vector<std::size_t> ranks_;
  std::vector<char> goal_;
  std::vector<std::vector<std::optional<Set>>> succ_;
  std::vector<std::vector<signed char>> cond_;

  std::unordered_map<std::vector<Id>, std::size_t, KeyHash> failed_;
  std::vector<Token> tokens_;
  std::size_t nodes_ = 0;
};

}  // namespace

ExistenceAnswer solve_bounded(const PlanningProblem& problem, std::size_t k, const std::vector<Formula>& vocabulary,
                              bool vocabulary_sufficient, const PlannerLimits& limits) {
  SolvabilityTable table;
  try {
    table = SolvabilityTable::build(problem, limits);
  } catch (const LimitExceeded& e) {
    return ExistenceAnswer::unknown(std::string("resource: ") + e.what());
  }
  // Every valid while-free plan has a trace with at least rank(I) steps, and
  // each step uses a distinct action occurrence.
  const std::size_t r = table.rank(table.initial());
  if (r == kUnsolvable || r > k) return ExistenceAnswer::none(table.size());
  BoundedSearch search(problem, table, vocabulary, limits);
  try {
    if (auto plan = search.run(k)) return ExistenceAnswer::found(*plan, search.nodes());
  } catch (const LimitExceeded& e) {
    return ExistenceAnswer::unknown(std::string("resource: ") + e.what(), search.nodes());
  }
  if (vocabulary_sufficient) return ExistenceAnswer::none(search.nodes());
  return ExistenceAnswer::unknown("vocabulary-limited: no plan within the given conditions", search.nodes());
}

}  // namespace kbp
