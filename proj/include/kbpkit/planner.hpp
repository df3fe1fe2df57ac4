#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbpkit/kbp.hpp"
#include "kbpkit/problem.hpp"

namespace kbp {

struct ExistenceAnswer {
  enum class Kind : std::uint8_t { kExists, kNone, kUnknown };
  Kind kind = Kind::kNone;
  Kbp witness;         // kExists only
  std::string reason;  // kUnknown only
  std::size_t explored = 0;

  bool exists() const { return kind == Kind::kExists; }
  static ExistenceAnswer found(Kbp witness, std::size_t explored = 0);
  static ExistenceAnswer none(std::size_t explored = 0);
  static ExistenceAnswer unknown(std::string reason, std::size_t explored = 0);
};

const char* to_string(ExistenceAnswer::Kind kind);

struct PlannerLimits {
  std::size_t max_states = 1 << 20;      // distinct knowledge states
  std::size_t max_nodes = 1 << 24;       // search nodes of the tree searches
};

inline constexpr std::size_t kUnsolvable = std::numeric_limits<std::size_t>::max();

// Least fixpoint over the knowledge states reachable from I. rank(M) is the
// least height of a standard policy reaching G from M (0 on goal states).
class SolvabilityTable {
 public:
  struct Entry {
    std::size_t rank = kUnsolvable;
    std::optional<ActionRef> action;  // chosen when 0 < rank < kUnsolvable
  };

  // Throws LimitExceeded when more than limits.max_states states are reachable.
  static SolvabilityTable build(const PlanningProblem& problem, const PlannerLimits& limits = {});

  std::size_t rank(const KnowledgeState& m) const;  // kUnsolvable if unknown
  const Entry* find(const KnowledgeState& m) const;
  const KnowledgeState& initial() const { return initial_; }
  std::size_t size() const { return entries_.size(); }
  // Number of states solved after each round; nondecreasing.
  const std::vector<std::size_t>& rounds() const { return rounds_; }

  // While-free standard policy following decreasing ranks from m.
  Kbp extract(const PlanningProblem& problem, const KnowledgeState& m) const;

 private:
  KnowledgeState initial_;
  std::unordered_map<KnowledgeState, Entry, KnowledgeStateHash> entries_;
  std::vector<std::size_t> rounds_;
};

// Successor knowledge states of m under an action, in feedback order for
// epistemic actions (inapplicable feedbacks skipped).
std::vector<std::pair<std::size_t, KnowledgeState>> action_successors(const PlanningProblem& problem,
                                                                      const KnowledgeState& m, ActionRef a);

ExistenceAnswer solve_existence(const PlanningProblem& problem, const PlannerLimits& limits = {});

// Requires no ontic actions.
ExistenceAnswer solve_existence_epistemic(const PlanningProblem& problem, const PlannerLimits& limits = {});

// Requires no ontic actions and a positive goal. The witness is the sequence
// of all epistemic actions.
ExistenceAnswer solve_epistemic_positive(const PlanningProblem& problem, const PlannerLimits& limits = {});

// Entailment check: for every choice of one feedback per action whose
// conjunction with init is satisfiable, G holds with each K(psi) read as
// "init & chosen feedbacks entails psi". Same preconditions as above.
bool positive_sequence_entails_goal(const PlanningProblem& problem,
                                    const std::vector<std::size_t>& actions);

// Candidate branching conditions: K l, K !l, !K l & !K !l per variable, every
// feedback atom, then the problem's own vocabulary. Duplicates removed.
std::vector<Formula> default_vocabulary(const PlanningProblem& problem);

// While-free KBPs of size at most k built from the problem's actions and the
// given conditions. kNone is returned when no plan exists at all, or when the
// search is exhausted and `vocabulary_sufficient` is set; otherwise kUnknown.
ExistenceAnswer solve_bounded(const PlanningProblem& problem, std::size_t k,
                              const std::vector<Formula>& vocabulary, bool vocabulary_sufficient = false,
                              const PlannerLimits& limits = {});

// Action sequences of length at most k. Requires either no epistemic actions,
// or no ontic actions and a positive goal.
ExistenceAnswer solve_bounded_sequence(const PlanningProblem& problem, std::size_t k,
                                       const PlannerLimits& limits = {});

// While-free epistemic plans whose actions follow `order` (action names,
// earliest first) along every branch. Requires no ontic actions and an order
// listing every epistemic action exactly once.
ExistenceAnswer solve_wfoe(const PlanningProblem& problem, const std::vector<std::string>& order,
                           const PlannerLimits& limits = {});

}  // namespace kbp
