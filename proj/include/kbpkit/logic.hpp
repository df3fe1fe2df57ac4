#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "kbpkit/formula.hpp"
#include "kbpkit/state.hpp"

namespace kbp {

// Mods(phi) over nvars variables. Throws MalformedFormula if phi is not
// objective (primed variables or K present).
KnowledgeState models(const Formula& phi, std::size_t nvars);

std::optional<State> find_model(const Formula& phi, std::size_t nvars);
bool satisfiable(const Formula& phi, std::size_t nvars);

// A state falsifying phi, if any.
std::optional<State> countermodel(const Formula& phi, std::size_t nvars);
bool tautology(const Formula& phi, std::size_t nvars);

// Every model of phi satisfies psi.
bool entails(const Formula& phi, const Formula& psi, std::size_t nvars);

// {s' : s s' |= theory}, ascending.
std::vector<State> successors(const Formula& theory, State s, std::size_t nvars);

// Calls visit(s') for each successor; stops early when visit returns false.
void for_each_successor(const Formula& theory, State s, std::size_t nvars,
                        const std::function<bool(State)>& visit);

// A state with no successor under the theory, if one exists.
std::optional<State> dead_state(const Formula& theory, std::size_t nvars);

}  // namespace kbp
