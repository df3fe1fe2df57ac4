#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kbpkit/formula.hpp"
#include "kbpkit/state.hpp"

namespace kbp {

// An ontic action: a theory over X and X'. Primed variables the theory does
// not mention are unconstrained (no implicit frame axioms).
struct OnticAction {
  std::string name;
  Formula theory;
};

// An epistemic action: ordered feedbacks phi_1..phi_n, each standing for the
// epistemic atom K(phi_i). Their disjunction must be a tautology.
struct EpistemicAction {
  std::string name;
  std::vector<Formula> feedbacks;
};

// Throws ValidationError naming a state without successor.
void validate_ontic(const OnticAction& action, std::size_t nvars, const VariableTable* vars = nullptr);
// Throws ValidationError with a witness state falsifying every feedback.
void validate_epistemic(const EpistemicAction& action, std::size_t nvars,
                        const VariableTable* vars = nullptr);

KnowledgeState progress_ontic(const KnowledgeState& m, const OnticAction& action, std::size_t nvars);

// Prog(M, K phi_i); nullopt when M |= K !phi_i, i.e. the feedback cannot occur.
std::optional<KnowledgeState> progress_feedback(const KnowledgeState& m,
                                                const EpistemicAction& action, std::size_t index);

// Indices i (ascending) whose progression is defined in M.
std::vector<std::size_t> applicable_feedbacks(const KnowledgeState& m, const EpistemicAction& action);

// test(phi): feedbacks (phi ; !phi).
EpistemicAction make_test_action(std::string name, const Formula& phi);

}  // namespace kbp
