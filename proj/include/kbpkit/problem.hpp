#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbpkit/action.hpp"
#include "kbpkit/formula.hpp"
#include "kbpkit/state.hpp"

namespace kbp {

enum class ActionKind : std::uint8_t { kOntic, kEpistemic };

struct ActionRef {
  ActionKind kind;
  std::size_t index;
  friend auto operator<=>(const ActionRef&, const ActionRef&) = default;
};

// (I, A_O, A_E, G) plus the optional inputs of the bounded and ordered
// variants. I = Mods(init).
struct PlanningProblem {
  VariableTable variables;
  Formula init;
  std::vector<OnticAction> ontic;
  std::vector<EpistemicAction> epistemic;
  Formula goal;  // SKNNF
  std::optional<std::size_t> bound;
  std::vector<std::string> order;       // action names, earliest first
  std::vector<Formula> vocabulary;      // extra candidate branching conditions
  std::vector<std::string> notes;       // header comment lines, without "# "

  std::size_t nvars() const { return variables.size(); }
  std::optional<ActionRef> find_action(std::string_view name) const;
  ActionRef action(std::string_view name) const;
  const std::string& action_name(ActionRef ref) const;
  std::size_t action_count() const { return ontic.size() + epistemic.size(); }

  KnowledgeState initial_state() const;
};

// Checks every load-time invariant: unique action names, satisfiable init,
// SKNNF goal, validated actions, well-formed order and vocabulary.
// Throws ValidationError.
void validate_problem(const PlanningProblem& problem);

}  // namespace kbp
