#include "kbpkit/semantics.hpp"

#include <set>
#include <unordered_set>

#include "kbpkit/error.hpp"

namespace kbp {

std::size_t ContinuationTable::KeyHash::operator()(const std::pair<const void*, Id>& k) const {
  return std::hash<const void*>()(k.first) * 31u ^ k.second;
}

ContinuationTable::ContinuationTable() { entries_.push_back({Kbp::empty(), kDone}); }

ContinuationTable::Id ContinuationTable::push(const Kbp& head, Id tail) {
  switch (head.kind()) {
    case Kbp::Kind::kEmpty:
      return tail;
    case Kbp::Kind::kSeq:
      return push(head.first(), push(head.second(), tail));
    default:
      break;
  }
  const auto key = std::make_pair(head.id(), tail);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const Id id = static_cast<Id>(entries_.size());
  entries_.push_back({head, tail});
  index_.emplace(key, id);
  return id;
}

bool expand(ContinuationTable& table, ContinuationTable::Id cont, const KnowledgeState& m,
            const PlanningProblem& problem, std::vector<Successor>& out) {
  out.clear();
  if (cont == ContinuationTable::kDone) return false;
  const Kbp head = table.head(cont);
  const auto tail = table.tail(cont);
  switch (head.kind()) {
    case Kbp::Kind::kAct: {
      const ActionRef ref = head.ref() ? *head.ref() : problem.action(head.action());
      if (ref.kind == ActionKind::kOntic) {
        out.push_back({tail, progress_ontic(m, problem.ontic[ref.index], problem.nvars()), Choice{ref, {}}});
      } else {
        const auto& a = problem.epistemic[ref.index];
        for (std::size_t i = 0; i < a.feedbacks.size(); ++i) {
          if (auto next = progress_feedback(m, a, i)) out.push_back({tail, std::move(*next), Choice{ref, i}});
        }
      }
      return true;
    }
    case Kbp::Kind::kIf: {
      const Kbp& branch = holds(m, head.condition()) ? head.then_branch() : head.else_branch();
      out.push_back({table.push(branch, tail), m, std::nullopt});
      return true;
    }
    case Kbp::Kind::kWhile: {
      if (holds(m, head.condition())) {
        out.push_back({table.push(head.body(), table.push(head, tail)), m, std::nullopt});
      } else {
        out.push_back({tail, m, std::nullopt});
      }
      return true;
    }
    default:
      throw ContractViolation("unnormalized continuation head");
  }
}

std::string to_string(const Trace& trace, const PlanningProblem& problem) {
  std::string out;
  const std::size_t n = problem.nvars();
  if (trace.states.empty()) return out;
  out += "  " + to_string(trace.states[0], n) + "\n";
  for (std::size_t i = 0; i < trace.choices.size() && i + 1 < trace.states.size(); ++i) {
    const Choice& c = trace.choices[i];
    out += "  " + problem.action_name(c.action);
    if (c.feedback) {
      out += " [K(" + to_string(problem.epistemic[c.action.index].feedbacks[*c.feedback], problem.variables) + ")]";
    }
    out += " -> " + to_string(trace.states[i + 1], n) + "\n";
  }
  return out;
}

const char* to_string(Verdict::Kind kind) {
  switch (kind) {
    case Verdict::Kind::kValid:
      return "valid";
    case Verdict::Kind::kInvalid:
      return "invalid";
    case Verdict::Kind::kNonTerminating:
      return "nonterminating";
  }
  return "?";
}

namespace {

struct Frame {
  ConfigKey key;
  std::vector<Successor> successors;
  std::size_t next = 0;
  bool terminal = false;
  bool stepped = false;  // entered through a progression step
};

// Shared depth-first walk over configurations. `on_terminal` returns false to
// stop; `prune` skips configurations already known to be fine.
class Walker {
 public:
  Walker(const Kbp& pi, const PlanningProblem& problem, const Limits& limits)
      : pi_(link(pi, problem)), problem_(problem), limits_(limits) {}

  enum class Stop : std::uint8_t { kExhausted, kVisitor, kCycle };

  template <typename OnTerminal, typename Prune, typename OnDone>
  Stop run(const KnowledgeState& m0, OnTerminal on_terminal, Prune prune, OnDone on_done) {
    if (m0.empty()) throw ContractViolation("initial knowledge state is empty");
    trace_.states = {m0};
    trace_.choices.clear();
    push({table_.push(pi_, ContinuationTable::kDone), m0}, false);
    while (!stack_.empty()) {
      Frame& top = stack_.back();
      if (top.terminal) {
        if (!on_terminal(top.key, trace_)) return Stop::kVisitor;
        pop();
        continue;
      }
      if (top.next == top.successors.size()) {
        on_done(top.key);
        pop();
        continue;
      }
      Successor s = top.successors[top.next++];
      ConfigKey key{s.cont, std::move(s.m)};
      if (prune(key)) continue;
      const bool stepped = s.choice.has_value();
      if (stepped) {
        trace_.states.push_back(key.m);
        trace_.choices.push_back(*s.choice);
      }
      if (on_path_.contains(key)) return Stop::kCycle;
      push(std::move(key), stepped);
    }
    return Stop::kExhausted;
  }

  const Trace& trace() const { return trace_; }

 private:
  void push(ConfigKey key, bool stepped) {
    if (stack_.size() >= limits_.max_path) throw LimitExceeded("path length limit exceeded");
    Frame f;
    f.terminal = !expand(table_, key.cont, key.m, problem_, f.successors);
    f.stepped = stepped;
    on_path_.insert(key);
    f.key = std::move(key);
    stack_.push_back(std::move(f));
  }

  void pop() {
    const Frame& f = stack_.back();
    on_path_.erase(f.key);
    if (f.stepped) {
      trace_.states.pop_back();
      trace_.choices.pop_back();
    }
    stack_.pop_back();
  }

  Kbp pi_;
  const PlanningProblem& problem_;
  const Limits& limits_;
  ContinuationTable table_;
  std::vector<Frame> stack_;
  std::unordered_set<ConfigKey, ConfigKeyHash> on_path_;
  Trace trace_;
};

}  // namespace

TraceOutcome for_each_trace(const Kbp& pi, const PlanningProblem& problem, const KnowledgeState& m0,
                            const std::function<bool(const Trace&)>& visit, const Limits& limits) {
  TraceOutcome outcome;
  Walker walker(pi, problem, limits);
  const auto stop = walker.run(
      m0,
      [&](const ConfigKey&, const Trace& t) {
        if (++outcome.traces > limits.max_traces) throw LimitExceeded("trace limit exceeded");
        return visit(t);
      },
      [](const ConfigKey&) { return false; }, [](const ConfigKey&) {});
  if (stop == Walker::Stop::kCycle) outcome.infinite = walker.trace();
  return outcome;
}

TraceSet enumerate_traces(const Kbp& pi, const PlanningProblem& problem, const KnowledgeState& m0,
                          const Limits& limits) {
  TraceSet out;
  auto outcome = for_each_trace(
      pi, problem, m0,
      [&](const Trace& t) {
        out.traces.push_back(t);
        return true;
      },
      limits);
  out.infinite = std::move(outcome.infinite);
  if (out.infinite) out.traces.clear();
  return out;
}

TraceSet enumerate_traces(const Kbp& pi, const PlanningProblem& problem, const Limits& limits) {
  return enumerate_traces(pi, problem, problem.initial_state(), limits);
}

Verdict verify_plan(const PlanningProblem& problem, const Kbp& pi, const KnowledgeState& m0,
                    const Limits& limits) {
  std::unordered_set<ConfigKey, ConfigKeyHash> good;
  Verdict verdict;
  Walker walker(pi, problem, limits);
  auto mark = [&](const ConfigKey& k) {
    good.insert(k);
    if (good.size() > limits.max_configurations) throw LimitExceeded("configuration limit exceeded");
  };
  const auto stop = walker.run(
      m0,
      [&](const ConfigKey& k, const Trace&) {
        if (!holds(k.m, problem.goal)) return false;
        mark(k);
        return true;
      },
      [&](const ConfigKey& k) { return good.contains(k); }, mark);
  verdict.configurations = good.size();
  switch (stop) {
    case Walker::Stop::kExhausted:
      verdict.kind = Verdict::Kind::kValid;
      break;
    case Walker::Stop::kVisitor:
      verdict.kind = Verdict::Kind::kInvalid;
      verdict.trace = walker.trace();
      break;
    case Walker::Stop::kCycle:
      verdict.kind = Verdict::Kind::kNonTerminating;
      verdict.trace = walker.trace();
      break;
  }
  return verdict;
}

Verdict verify_plan(const PlanningProblem& problem, const Kbp& pi, const Limits& limits) {
  return verify_plan(problem, pi, problem.initial_state(), limits);
}

Equivalence equivalent_in(const Kbp& pi, const Kbp& pi2, const PlanningProblem& problem,
                          const KnowledgeState& m0, const Limits& limits) {
  auto collect = [&](const Kbp& p, std::set<std::vector<KnowledgeState>>& out) {
    return for_each_trace(
               p, problem, m0,
               [&](const Trace& t) {
                 out.insert(t.states);
                 return true;
               },
               limits)
        .finite();
  };
  std::set<std::vector<KnowledgeState>> a;
  std::set<std::vector<KnowledgeState>> b;
  if (!collect(pi, a) || !collect(pi2, b)) return Equivalence::kNonTerminating;
  return a == b ? Equivalence::kEquivalent : Equivalence::kDifferent;
}

Equivalence equivalent_in(const Kbp& pi, const Kbp& pi2, const PlanningProblem& problem,
                          const Limits& limits) {
  return equivalent_in(pi, pi2, problem, problem.initial_state(), limits);
}

}  // namespace kbp
