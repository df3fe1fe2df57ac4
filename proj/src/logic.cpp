#include "kbpkit/logic.hpp"

#include <bit>
#include <numeric>

#include "kbpkit/error.hpp"

namespace kbp {

namespace {

enum class Truth : std::uint8_t { kFalse, kTrue, kUnknown };

Truth negate(Truth t) {
  if (t == Truth::kUnknown) return t;
  return t == Truth::kTrue ? Truth::kFalse : Truth::kTrue;
}

struct Partial {
  std::uint64_t known = 0;
  std::uint64_t value = 0;

  Truth get(std::size_t index) const {
    auto b = variable_bit(index);
    if ((known & b) == 0) return Truth::kUnknown;
    return (value & b) != 0 ? Truth::kTrue : Truth::kFalse;
  }
};

// Kleene evaluation under partial assignments of the current and next state.
Truth eval3(const Formula& f, const Partial& cur, const Partial& next) {
  switch (f.op()) {
    case Connective::kTrue:
      return Truth::kTrue;
    case Connective::kFalse:
      return Truth::kFalse;
    case Connective::kVar:
      return cur.get(f.var());
    case Connective::kPrimed:
      return next.get(f.var());
    case Connective::kNot:
      return negate(eval3(f.lhs(), cur, next));
    case Connective::kAnd: {
      auto l = eval3(f.lhs(), cur, next);
      if (l == Truth::kFalse) return l;
      auto r = eval3(f.rhs(), cur, next);
      if (r == Truth::kFalse) return r;
      return l == Truth::kTrue && r == Truth::kTrue ? Truth::kTrue : Truth::kUnknown;
    }
    case Connective::kOr: {
      auto l = eval3(f.lhs(), cur, next);
      if (l == Truth::kTrue) return l;
      auto r = eval3(f.rhs(), cur, next);
      if (r == Truth::kTrue) return r;
      return l == Truth::kFalse && r == Truth::kFalse ? Truth::kFalse : Truth::kUnknown;
    }
    case Connective::kImplies: {
      auto l = eval3(f.lhs(), cur, next);
      if (l == Truth::kFalse) return Truth::kTrue;
      auto r = eval3(f.rhs(), cur, next);
      if (r == Truth::kTrue) return r;
      return l == Truth::kTrue && r == Truth::kFalse ? Truth::kFalse : Truth::kUnknown;
    }
    case Connective::kIff: {
      auto l = eval3(f.lhs(), cur, next);
      if (l == Truth::kUnknown) return l;
      auto r = eval3(f.rhs(), cur, next);
      if (r == Truth::kUnknown) return r;
      return l == r ? Truth::kTrue : Truth::kFalse;
    }
    case Connective::kKnow:
      throw MalformedFormula("K atom inside an objective formula");
  }
  return Truth::kUnknown;
}

// Occurrence counts per variable, used to pick splitting order.
void count_occurrences(const Formula& f, bool primed, std::vector<std::size_t>& counts) {
  switch (f.op()) {
    case Connective::kVar:
      if (!primed) ++counts[f.var()];
      return;
    case Connective::kPrimed:
      if (primed) ++counts[f.var()];
      return;
    case Connective::kTrue:
    case Connective::kFalse:
      return;
    case Connective::kNot:
    case Connective::kKnow:
      count_occurrences(f.lhs(), primed, counts);
      return;
    default:
      count_occurrences(f.lhs(), primed, counts);
      count_occurrences(f.rhs(), primed, counts);
  }
}

std::vector<std::size_t> split_order(const Formula& f, bool primed) {
  std::vector<std::size_t> counts(kMaxVariables, 0);
  count_occurrences(f, primed, counts);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < kMaxVariables; ++i) {
    if (counts[i] > 0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  return order;
}

// Shannon splitting over one side (current or next) of the assignment.
// Emits every full assignment of that side, restricted to nvars variables,
// that makes f true. visit returns false to stop.
class Splitter {
 public:
  Splitter(const Formula& f, bool split_next, std::size_t nvars,
           const std::function<bool(State)>& visit)
      : f_(f), split_next_(split_next), all_(variables_mask(nvars)), visit_(visit) {
    order_ = split_order(f, split_next);
  }

  // Returns false if enumeration was stopped early.
  bool run(Partial cur, Partial next) { return split(cur, next, 0); }

 private:
  bool split(Partial& cur, Partial& next, std::size_t pos) {
    auto t = eval3(f_, cur, next);
    if (t == Truth::kFalse) return true;
    Partial& side = split_next_ ? next : cur;
    if (t == Truth::kTrue) return emit_completions(side);
    while (pos < order_.size() && (side.known & variable_bit(order_[pos])) != 0) ++pos;
    if (pos == order_.size()) {
      throw MalformedFormula("formula refers to variables outside the declared range");
    }
    const auto b = variable_bit(order_[pos]);
    const Partial saved = side;
    side.known |= b;
    side.value &= ~b;
    if (!split(cur, next, pos + 1)) return false;
    side.value |= b;
    bool keep_going = split(cur, next, pos + 1);
    side = saved;
    return keep_going;
  }

  bool emit_completions(const Partial& side) {
    const std::uint64_t free = all_ & ~side.known;
    const std::uint64_t base = side.value & side.known & all_;
    std::uint64_t sub = 0;
    while (true) {
      if (!visit_(State(base | sub))) return false;
      if (sub == free) break;
      sub = (sub - free) & free;
    }
    return true;
  }

  const Formula& f_;
  bool split_next_;
  std::uint64_t all_;
  const std::function<bool(State)>& visit_;
  std::vector<std::size_t> order_;
};

void require_objective(const Formula& phi) {
  if (!is_objective(phi)) {
    throw MalformedFormula("expected an objective formula without primed variables");
  }
}

void require_width(const Formula& phi, std::size_t nvars) {
  if (nvars > kMaxVariables) throw ContractViolation("more than 64 variables");
  if ((variables_of(phi) | primed_variables_of(phi)) & ~variables_mask(nvars)) {
    throw MalformedFormula("formula mentions an undeclared variable");
  }
}

}  // namespace

KnowledgeState models(const Formula& phi, std::size_t nvars) {
  require_objective(phi);
  require_width(phi, nvars);
  std::vector<State> out;
  std::function<bool(State)> visit = [&](State s) {
    out.push_back(s);
    return true;
  };
  Splitter(phi, false, nvars, visit).run({}, {});
  return KnowledgeState(std::move(out));
}

std::optional<State> find_model(const Formula& phi, std::size_t nvars) {
  require_objective(phi);
  require_width(phi, nvars);
  std::optional<State> found;
  std::function<bool(State)> visit = [&](State s) {
    found = s;
    return false;
  };
  Splitter(phi, false, nvars, visit).run({}, {});
  return found;
}

bool satisfiable(const Formula& phi, std::size_t nvars) { return find_model(phi, nvars).has_value(); }

std::optional<State> countermodel(const Formula& phi, std::size_t nvars) {
  return find_model(Formula::negation(phi), nvars);
}

bool tautology(const Formula& phi, std::size_t nvars) { return !countermodel(phi, nvars).has_value(); }

bool entails(const Formula& phi, const Formula& psi, std::size_t nvars) {
  return !satisfiable(Formula::conjunction(phi, Formula::negation(psi)), nvars);
}

void for_each_successor(const Formula& theory, State s, std::size_t nvars,
                        const std::function<bool(State)>& visit) {
  require_width(theory, nvars);
  Partial cur{variables_mask(nvars), s.bits()};
  Splitter(theory, true, nvars, visit).run(cur, {});
}

std::vector<State> successors(const Formula& theory, State s, std::size_t nvars) {
  std::vector<State> out;
  for_each_successor(theory, s, nvars, [&](State n) {
    out.push_back(n);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void flatten_conjunction(const Formula& f, std::vector<Formula>& out) {
  if (f.op() == Connective::kAnd) {
    flatten_conjunction(f.lhs(), out);
    flatten_conjunction(f.rhs(), out);
  } else {
    out.push_back(f);
  }
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::optional<State> dead_state(const Formula& theory, std::size_t nvars) {
  require_width(theory, nvars);
  // Conjuncts over disjoint (x, x') slots are independent: for all s there is
  // an s' iff that holds for each group of connected conjuncts separately.
  std::vector<Formula> conjuncts;
  flatten_conjunction(theory, conjuncts);
  UnionFind slots(2 * kMaxVariables);
  std::vector<std::uint64_t> cur_mask(conjuncts.size()), next_mask(conjuncts.size());
  for (std::size_t c = 0; c < conjuncts.size(); ++c) {
    cur_mask[c] = variables_of(conjuncts[c]);
    next_mask[c] = primed_variables_of(conjuncts[c]);
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < kMaxVariables; ++i) {
      for (int primed = 0; primed < 2; ++primed) {
        const auto mask = primed ? next_mask[c] : cur_mask[c];
        if ((mask & variable_bit(i)) == 0) continue;
        const std::size_t slot = 2 * i + primed;
        if (first) slots.unite(*first, slot);
        first = slot;
      }
    }
  }
  std::vector<std::vector<Formula>> groups(2 * kMaxVariables);
  std::vector<std::uint64_t> group_cur(2 * kMaxVariables, 0);
  for (std::size_t c = 0; c < conjuncts.size(); ++c) {
    std::size_t root = 2 * kMaxVariables;  // constant conjunct
    for (std::size_t i = 0; i < kMaxVariables && root == 2 * kMaxVariables; ++i) {
      if (cur_mask[c] & variable_bit(i)) root = slots.find(2 * i);
      else if (next_mask[c] & variable_bit(i)) root = slots.find(2 * i + 1);
    }
    if (root == 2 * kMaxVariables) {
      if (!evaluate(conjuncts[c], State(0), State(0))) return State(0);
      continue;
    }
    groups[root].push_back(conjuncts[c]);
    group_cur[root] |= cur_mask[c];
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    const Formula part = conjoin(groups[g]);
    const std::uint64_t vars = group_cur[g];
    if (std::popcount(vars) > 24) throw LimitExceeded("ontic theory component too large to validate");
    std::uint64_t sub = 0;
    while (true) {
      bool found = false;
      Partial cur{vars, sub};
      std::function<bool(State)> visit = [&](State) {
        found = true;
        return false;
      };
      Splitter(part, true, nvars, visit).run(cur, {});
      if (!found) return State(sub);
      if (sub == vars) break;
      sub = (sub - vars) & vars;
    }
  }
  return std::nullopt;
}

}  // namespace kbp
