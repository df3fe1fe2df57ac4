#pragma once

#include <string>
#include <string_view>

#include "kbpkit/formula.hpp"
#include "kbpkit/kbp.hpp"
#include "kbpkit/problem.hpp"
#include "kbpkit/qbf.hpp"

namespace kbp {

struct ObjectiveSyntax {
  bool allow_primed = false;  // x' (ontic theories)
  bool allow_frame = false;   // frame(v1, ..., vk)
  bool declare = false;       // unknown identifiers become new variables
};

// All parse functions throw ParseError with 1-based line and column.
Formula parse_objective(std::string_view text, VariableTable& vars, ObjectiveSyntax syntax = {});
Formula parse_objective(std::string_view text, const VariableTable& vars);

// Purely subjective formula; the result is not normalized.
Formula parse_epistemic(std::string_view text, const VariableTable& vars);

// Conditions are normalized with to_sknnf. Action names are left unresolved.
Kbp parse_kbp(std::string_view text, const VariableTable& vars);

// Problem file:
//   # note           (leading comment lines are kept as notes)
//   var a b c
//   init: <objective>
//   ontic NAME: <theory over x and x'>
//   epistemic NAME: <phi1> ; <phi2> ; ...
//   goal: <epistemic>
//   bound: <k>        order: NAME ...        vocab: <epistemic>   (optional)
// The result is not validated; see validate_problem.
PlanningProblem parse_problem(std::string_view text);
std::string print_problem(const PlanningProblem& problem);

// Lines "exists a b" / "forall c", then "matrix: <formula>".
Qbf parse_qbf(std::string_view text);
std::string print_qbf(const Qbf& psi);

// One epistemic formula per non-blank, non-comment line; normalized to SKNNF.
std::vector<Formula> parse_vocabulary(std::string_view text, const VariableTable& vars);

}  // namespace kbp
