#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <string_view>
#include <vector>

#include "kbpkit/kbp.hpp"
#include "kbpkit/problem.hpp"
#include "kbpkit/semantics.hpp"

namespace kbp {

struct CompileLimits {
  std::size_t max_nodes = 1 << 22;  // size of the emitted policy
  std::size_t max_path = 1 << 14;
};

struct CompileResult {
  enum class Kind : std::uint8_t { kPolicy, kNonTerminating };
  Kind kind = Kind::kPolicy;
  Kbp policy;
  bool ok() const { return kind == Kind::kPolicy; }
};

// The standard policy induced by pi and m0. Throws LimitExceeded when the
// policy would exceed max_nodes.
CompileResult compile_policy(const Kbp& pi, const PlanningProblem& problem, const KnowledgeState& m0,
                             const CompileLimits& limits = {});
CompileResult compile_policy(const Kbp& pi, const PlanningProblem& problem,
                             const CompileLimits& limits = {});

// Feedback branches of an epistemic action in cascade order. Feedbacks with
// equal progressed states are merged; a feedback whose progressed state is a
// strict subset of another's comes first so that its test fires first.
// Otherwise the order is reverse declaration order.
std::vector<std::size_t> cascade_order(const std::vector<std::pair<std::size_t, KnowledgeState>>& branches);

// `action` followed by if K(phi_i) then sub_i else if ... else sub_last.
// `feedbacks` and `subs` are aligned and already in cascade order.
Kbp feedback_cascade(const Kbp& action, const EpistemicAction& a, const std::vector<std::size_t>& feedbacks,
                     const std::vector<Kbp>& subs);

// test(x1); ...; test(xn) over n hidden variables with goal "decide every
// variable". Returns the problem and the chain.
std::pair<PlanningProblem, Kbp> test_chain(std::size_t n);

struct SuccinctnessRow {
  std::size_t n = 0;
  std::size_t kbp_size = 0;
  std::size_t policy_size = 0;
  bool lower_bound = false;  // compilation ran out of budget
};

SuccinctnessRow measure_row(std::size_t n, const PlanningProblem& problem, const Kbp& pi,
                            const CompileLimits& limits = {});

// Rows n = 0..max_n for "test-chain" or "3sat-family" (one clause per
// instance; n = 0 gives the empty row). Throws ContractViolation on an
// unknown family.
std::vector<SuccinctnessRow> measure_succinctness(std::string_view family, std::size_t max_n,
                                                  const CompileLimits& limits = {});
std::string succinctness_csv(const std::vector<SuccinctnessRow>& rows);

}  // namespace kbp
