#include "kbpkit/action.hpp"

#include "kbpkit/error.hpp"
#include "kbpkit/logic.hpp"

namespace kbp {

namespace {

std::string render(State s, std::size_t nvars, const VariableTable* vars) {
  if (vars == nullptr || vars->size() != nvars) return to_string(s, nvars);
  std::string out;
  for (std::size_t i = 0; i < nvars; ++i) {
    if (!out.empty()) out += ' ';
    out += (s.get(i) ? "" : "!") + vars->name(i);
  }
  return out;
}

bool has_know(const Formula& f) {
  switch (f.op()) {
    case Connective::kKnow:
      return true;
    case Connective::kTrue:
    case Connective::kFalse:
    case Connective::kVar:
    case Connective::kPrimed:
      return false;
    case Connective::kNot:
      return has_know(f.lhs());
    default:
      return has_know(f.lhs()) || has_know(f.rhs());
  }
}

}  // namespace

void validate_ontic(const OnticAction& action, std::size_t nvars, const VariableTable* vars) {
  if (has_know(action.theory)) {
    throw ValidationError("theory of ontic action '" + action.name + "' contains a K atom");
  }
  if (auto dead = dead_state(action.theory, nvars)) {
    throw ValidationError("ontic action '" + action.name + "' has no successor from state " +
                          render(*dead, nvars, vars));
  }
}

void validate_epistemic(const EpistemicAction& action, std::size_t nvars, const VariableTable* vars) {
  if (action.feedbacks.empty()) {
    throw ValidationError("epistemic action '" + action.name + "' has no feedback");
  }
  for (const auto& f : action.feedbacks) {
    if (!is_objective(f)) {
      throw ValidationError("feedback of '" + action.name + "' is not an objective formula");
    }
  }
  if (auto witness = countermodel(disjoin(action.feedbacks), nvars)) {
    throw ValidationError("feedbacks of epistemic action '" + action.name +
                          "' are not exhaustive; no feedback holds at " +
                          render(*witness, nvars, vars));
  }
}

KnowledgeState progress_ontic(const KnowledgeState& m, const OnticAction& action, std::size_t nvars) {
  std::vector<State> out;
  out.reserve(m.size());
  for (State s : m) {
    for_each_successor(action.theory, s, nvars, [&](State n) {
      out.push_back(n);
      return true;
    });
  }
  return KnowledgeState(std::move(out));
}

std::optional<KnowledgeState> progress_feedback(const KnowledgeState& m,
                                                const EpistemicAction& action, std::size_t index) {
  if (index >= action.feedbacks.size()) throw ContractViolation("feedback index out of range");
  const Formula& phi = action.feedbacks[index];
  std::vector<State> kept;
  kept.reserve(m.size());
  for (State s : m) {
    if (evaluate(phi, s)) kept.push_back(s);
  }
  if (kept.empty()) return std::nullopt;
  return KnowledgeState(std::move(kept));
}

std::vector<std::size_t> applicable_feedbacks(const KnowledgeState& m, const EpistemicAction& action) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < action.feedbacks.size(); ++i) {
    for (State s : m) {
      if (evaluate(action.feedbacks[i], s)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

EpistemicAction make_test_action(std::string name, const Formula& phi) {
  if (!is_objective(phi)) throw MalformedFormula("test() needs an objective formula");
  return EpistemicAction{std::move(name), {phi, Formula::negation(phi)}};
}

}  // namespace kbp
