#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kbpkit/formula.hpp"
#include "kbpkit/problem.hpp"

namespace kbp {

// Knowledge-based program: empty | action | sequence | if | while.
// Immutable; subprograms are shared between values.
class Kbp {
 public:
  enum class Kind : std::uint8_t { kEmpty, kAct, kSeq, kIf, kWhile };

  Kbp();  // the empty program

  static Kbp empty();
  static Kbp act(std::string action, std::optional<ActionRef> ref = std::nullopt);
  static Kbp seq(Kbp first, Kbp second);
  static Kbp branch(Formula condition, Kbp then_branch, Kbp else_branch);
  static Kbp loop(Formula condition, Kbp body);

  Kind kind() const;
  const std::string& action() const;
  // Resolved by link(); nullopt on unlinked action nodes.
  const std::optional<ActionRef>& ref() const;
  const Formula& condition() const;
  const Kbp& first() const;        // kSeq
  const Kbp& second() const;       // kSeq
  const Kbp& then_branch() const;  // kIf
  const Kbp& else_branch() const;  // kIf
  const Kbp& body() const;         // kWhile

  bool is_empty() const { return kind() == Kind::kEmpty; }
  // Node identity; two values share a node iff their ids are equal.
  const void* id() const { return node_.get(); }

  friend bool operator==(const Kbp& a, const Kbp& b);

 private:
  struct Node;
  explicit Kbp(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Right-associated sequence; the empty list gives the empty program.
Kbp sequence(const std::vector<Kbp>& parts);

// Action occurrences plus the sizes of branching conditions.
std::size_t kbp_size(const Kbp& pi);
std::size_t action_occurrences(const Kbp& pi);
bool is_while_free(const Kbp& pi);

// Canonical concrete syntax, one statement per line; else-skip is omitted.
std::string to_string(const Kbp& pi, const VariableTable& vars);

// Resolves action names against the problem. Throws ValidationError on an
// unknown name or a non-SKNNF condition.
Kbp link(const Kbp& pi, const PlanningProblem& problem);

// Every if/while condition is a single feedback atom K(phi_i) of the epistemic
// action executed immediately before it, on every syntactic path.
bool is_standard_policy(const Kbp& pi, const PlanningProblem& problem);

}  // namespace kbp
