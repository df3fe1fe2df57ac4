#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kbpkit/state.hpp"

namespace kbp {

enum class Connective : std::uint8_t {
  kTrue,
  kFalse,
  kVar,
  kPrimed,  // x', only inside ontic theories
  kNot,
  kAnd,
  kOr,
  kImplies,
  kIff,
  kKnow,  // K(phi) with phi objective
};

// Immutable propositional / S5 formula. Objective formulas, ontic theories
// (with primed variables) and purely subjective epistemic formulas share this
// representation; the predicates below state which fragment a value is in.
class Formula {
 public:
  Formula();  // true

  static Formula truth();
  static Formula falsity();
  static Formula var(std::size_t index);
  static Formula primed(std::size_t index);
  static Formula negation(Formula operand);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula equivalence(Formula lhs, Formula rhs);
  static Formula know(Formula objective);

  Connective op() const;
  std::size_t var() const;
  // Operand of kNot / kKnow, left operand of binary connectives.
  const Formula& lhs() const;
  const Formula& rhs() const;

  bool is_binary() const;
  bool is_constant() const { return op() == Connective::kTrue || op() == Connective::kFalse; }

  // Structural hash, consistent with operator==.
  std::size_t hash() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Formula operator!(const Formula& f);
Formula operator&(const Formula& a, const Formula& b);
Formula operator|(const Formula& a, const Formula& b);

// Balanced folds; the empty conjunction is true and the empty disjunction false.
Formula conjoin(std::span<const Formula> parts);
Formula disjoin(std::span<const Formula> parts);

// x_i^value: the literal x_i when value holds, !x_i otherwise.
Formula literal(std::size_t index, bool value);

// Conjunction of v' <-> v over the given variables.
Formula frame_axioms(std::span<const std::size_t> vars);

// Occurrences of symbols, connectives and K; constants count 1.
std::size_t formula_size(const Formula& f);

bool is_objective(const Formula& f);   // no K, no primed variables
bool has_primed(const Formula& f);
bool is_purely_subjective(const Formula& f);
bool is_sknnf(const Formula& f);
bool is_positive(const Formula& sknnf);

// Bit mask of the variables occurring (unprimed and primed respectively).
std::uint64_t variables_of(const Formula& f);
std::uint64_t primed_variables_of(const Formula& f);

bool evaluate(const Formula& objective, State s);
// Theory evaluation over a current/next state pair.
bool evaluate(const Formula& theory, State current, State next);

// M |= Phi for purely subjective Phi. Throws ContractViolation on empty M.
bool holds(const KnowledgeState& m, const Formula& phi);

// Equivalent SKNNF: -> and <-> expanded, negations pushed onto K atoms.
Formula to_sknnf(const Formula& phi);

// Negation normal form of an objective formula (negations on variables only).
Formula objective_nnf(const Formula& phi);

// Rebuilds f with each variable occurrence (outside K) replaced by
// replace(index, positive); used after objective_nnf so polarity is known.
Formula substitute_literals(const Formula& nnf,
                            const std::function<Formula(std::size_t, bool)>& replace);

// Renames variable indices (unprimed and primed alike).
Formula remap_variables(const Formula& f, const std::function<std::size_t(std::size_t)>& map);

std::string to_string(const Formula& f, const VariableTable& vars);

struct FormulaHash {
  std::size_t operator()(const Formula& f) const;
};

}  // namespace kbp
