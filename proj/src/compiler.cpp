#include "kbpkit/compiler.hpp"

#include <unordered_map>
#include <unordered_set>

#include "kbpkit/error.hpp"
#include "kbpkit/logic.hpp"

namespace kbp {

std::vector<std::size_t> cascade_order(const std::vector<std::pair<std::size_t, KnowledgeState>>& branches) {
  std::vector<std::size_t> pending;  // positions into branches
  for (std::size_t i = branches.size(); i-- > 0;) {
    bool duplicate = false;
    for (std::size_t j : pending) duplicate = duplicate || branches[j].second == branches[i].second;
    if (!duplicate) pending.push_back(i);
  }
  std::vector<std::size_t> out;
  while (!pending.empty()) {
    std::size_t pick = 0;
    for (; pick < pending.size(); ++pick) {
      const auto& m = branches[pending[pick]].second;
      bool minimal = true;
      for (std::size_t j : pending) {
        const auto& other = branches[j].second;
        if (other != m && other.is_subset_of(m)) minimal = false;
      }
      if (minimal) break;
    }
    out.push_back(branches[pending[pick]].first);
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

Kbp feedback_cascade(const Kbp& action, const EpistemicAction& a, const std::vector<std::size_t>& feedbacks,
                     const std::vector<Kbp>& subs) {
  if (feedbacks.empty() || feedbacks.size() != subs.size()) {
    throw ContractViolation("feedback_cascade: mismatched branches");
  }
  Kbp tail = subs.back();
  if (feedbacks.size() == 1) return Kbp::seq(action, tail);
  for (std::size_t i = feedbacks.size() - 1; i-- > 0;) {
    tail = Kbp::branch(Formula::know(a.feedbacks[feedbacks[i]]), subs[i], tail);
  }
  return Kbp::seq(action, tail);
}

namespace {

class Compiler {
 public:
  Compiler(const PlanningProblem& problem, const CompileLimits& limits) : problem_(problem), limits_(limits) {}

  struct Out {
    Kbp policy;
    std::size_t size = 0;
  };

  // nullopt: a configuration repeated on the current path.
  std::optional<Out> compile(ContinuationTable::Id cont, const KnowledgeState& m) {
    ConfigKey key{cont, m};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (on_path_.contains(key)) return std::nullopt;
    if (on_path_.size() >= limits_.max_path) throw LimitExceeded("compile: path length limit exceeded");
    on_path_.insert(key);
    std::optional<Out> out = step(cont, m);
    on_path_.erase(key);
    if (out) {
      if (out->size > limits_.max_nodes) throw LimitExceeded("compile: policy size limit exceeded");
      memo_.emplace(std::move(key), *out);
    }
    return out;
  }

  ContinuationTable& table() { return table_; }

 private:
  std::optional<Out> step(ContinuationTable::Id cont, const KnowledgeState& m) {
    if (cont == ContinuationTable::kDone) return Out{};
    const Kbp head = table_.head(cont);
    const auto tail = table_.tail(cont);
    switch (head.kind()) {
      case Kbp::Kind::kAct: {
        const ActionRef ref = *head.ref();
        if (ref.kind == ActionKind::kOntic) {
          auto rest = compile(tail, progress_ontic(m, problem_.ontic[ref.index], problem_.nvars()));
          if (!rest) return std::nullopt;
          return Out{rest->policy.is_empty() ? head : Kbp::seq(head, rest->policy), rest->size + 1};
        }
        const auto& a = problem_.epistemic[ref.index];
        std::vector<std::pair<std::size_t, KnowledgeState>> branches;
        for (std::size_t i = 0; i < a.feedbacks.size(); ++i) {
          if (auto next = progress_feedback(m, a, i)) branches.emplace_back(i, std::move(*next));
        }
        const auto order = cascade_order(branches);
        std::vector<Kbp> subs;
        std::size_t size = 1;
        for (std::size_t idx : order) {
          for (const auto& [i, next] : branches) {
            if (i != idx) continue;
            auto sub = compile(tail, next);
            if (!sub) return std::nullopt;
            subs.push_back(sub->policy);
            size += sub->size;
          }
        }
        for (std::size_t j = 0; j + 1 < order.size(); ++j) {
          size += formula_size(a.feedbacks[order[j]]) + 1;
        }
        Kbp policy = feedback_cascade(head, a, order, subs);
        return Out{policy, size};
      }
      case Kbp::Kind::kIf: {
        const Kbp& branch = holds(m, head.condition()) ? head.then_branch() : head.else_branch();
        return compile(table_.push(branch, tail), m);
      }
      case Kbp::Kind::kWhile: {
        if (holds(m, head.condition())) return compile(table_.push(head.body(), table_.push(head, tail)), m);
        return compile(tail, m);
      }
      default:
        throw ContractViolation("unnormalized continuation head");
    }
  }

  const PlanningProblem& problem_;
  const CompileLimits& limits_;
  ContinuationTable table_;
  std::unordered_map<ConfigKey, Out, ConfigKeyHash> memo_;
  std::unordered_set<ConfigKey, ConfigKeyHash> on_path_;
};

// Seq chains built by the compiler nest on the right already, but an action
// followed by a cascade is Seq(action, If...), and sub-policies may be
// sequences; flatten so the result is canonically right-associated.
void flatten(const Kbp& pi, std::vector<Kbp>& out);

Kbp canonical(const Kbp& pi) {
  switch (pi.kind()) {
    case Kbp::Kind::kSeq: {
      std::vector<Kbp> parts;
      flatten(pi, parts);
      for (auto& p : parts) p = canonical(p);
      return sequence(parts);
    }
    case Kbp::Kind::kIf:
      return Kbp::branch(pi.condition(), canonical(pi.then_branch()), canonical(pi.else_branch()));
    case Kbp::Kind::kWhile:
      return Kbp::loop(pi.condition(), canonical(pi.body()));
    default:
      return pi;
  }
}

void flatten(const Kbp& pi, std::vector<Kbp>& out) {
  if (pi.kind() == Kbp::Kind::kSeq) {
    flatten(pi.first(), out);
    flatten(pi.second(), out);
  } else if (!pi.is_empty()) {
    out.push_back(pi);
  }
}

}  // namespace

CompileResult compile_policy(const Kbp& pi, const PlanningProblem& problem, const KnowledgeState& m0,
                             const CompileLimits& limits) {
  if (m0.empty()) throw ContractViolation("compile_policy: empty initial knowledge state");
  Compiler compiler(problem, limits);
  const Kbp linked = link(pi, problem);
  auto out = compiler.compile(compiler.table().push(linked, ContinuationTable::kDone), m0);
  CompileResult result;
  if (!out) {
    result.kind = CompileResult::Kind::kNonTerminating;
    return result;
  }
  result.policy = canonical(out->policy);
  return result;
}

CompileResult compile_policy(const Kbp& pi, const PlanningProblem& problem, const CompileLimits& limits) {
  return compile_policy(pi, problem, problem.initial_state(), limits);
}

std::pair<PlanningProblem, Kbp> test_chain(std::size_t n) {
  PlanningProblem p;
  std::vector<Kbp> steps;
  std::vector<Formula> decided;
  for (std::size_t i = 0; i < n; ++i) p.variables.declare("x" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = "test" + std::to_string(i + 1);
    p.epistemic.push_back(make_test_action(name, Formula::var(i)));
    steps.push_back(Kbp::act(name, ActionRef{ActionKind::kEpistemic, i}));
    decided.push_back(Formula::know(Formula::var(i)) | Formula::know(!Formula::var(i)));
  }
  p.init = Formula::truth();
  p.goal = conjoin(decided);
  p.notes = {"test-chain n=" + std::to_string(n)};
  return {std::move(p), sequence(steps)};
}

SuccinctnessRow measure_row(std::size_t n, const PlanningProblem& problem, const Kbp& pi,
                            const CompileLimits& limits) {
  SuccinctnessRow row;
  row.n = n;
  row.kbp_size = kbp_size(pi);
  try {
    auto result = compile_policy(pi, problem, limits);
    if (!result.ok()) throw ContractViolation("measure_row: program does not terminate");
    row.policy_size = kbp_size(result.policy);
  } catch (const LimitExceeded&) {
    row.policy_size = limits.max_nodes;
    row.lower_bound = true;
  }
  return row;
}

}  // namespace kbp
