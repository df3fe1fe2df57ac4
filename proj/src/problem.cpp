#include "kbpkit/problem.hpp"

#include <set>

#include "kbpkit/error.hpp"
#include "kbpkit/logic.hpp"

namespace kbp {

std::optional<ActionRef> PlanningProblem::find_action(std::string_view name) const {
  for (std::size_t i = 0; i < ontic.size(); ++i) {
    if (ontic[i].name == name) return ActionRef{ActionKind::kOntic, i};
  }
  for (std::size_t i = 0; i < epistemic.size(); ++i) {
    if (epistemic[i].name == name) return ActionRef{ActionKind::kEpistemic, i};
  }
  return std::nullopt;
}

ActionRef PlanningProblem::action(std::string_view name) const {
  auto ref = find_action(name);
  if (!ref) throw ValidationError("unknown action '" + std::string(name) + "'");
  return *ref;
}

const std::string& PlanningProblem::action_name(ActionRef ref) const {
  return ref.kind == ActionKind::kOntic ? ontic.at(ref.index).name : epistemic.at(ref.index).name;
}

KnowledgeState PlanningProblem::initial_state() const { return models(init, nvars()); }

void validate_problem(const PlanningProblem& problem) {
  const auto n = problem.nvars();
  std::set<std::string> names;
  auto claim = [&](const std::string& name) {
    if (!names.insert(name).second) throw ValidationError("duplicate action name '" + name + "'");
  };
  for (const auto& a : problem.ontic) claim(a.name);
  for (const auto& a : problem.epistemic) claim(a.name);

  if (!is_objective(problem.init)) throw ValidationError("init must be an objective formula");
  if (!satisfiable(problem.init, n)) throw ValidationError("init is unsatisfiable (I would be empty)");
  if (!is_sknnf(problem.goal)) throw ValidationError("goal is not in SKNNF");
  for (const auto& v : problem.vocabulary) {
    if (!is_sknnf(v)) throw ValidationError("vocabulary condition is not in SKNNF");
  }
  for (const auto& a : problem.ontic) validate_ontic(a, n, &problem.variables);
  for (const auto& a : problem.epistemic) validate_epistemic(a, n, &problem.variables);

  std::set<std::string> ordered;
  for (const auto& name : problem.order) {
    auto ref = problem.find_action(name);
    if (!ref) throw ValidationError("order mentions unknown action '" + name + "'");
    if (!ordered.insert(name).second) throw ValidationError("order repeats action '" + name + "'");
  }
}

}  // namespace kbp
