#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbpkit/kbp.hpp"
#include "kbpkit/problem.hpp"

namespace kbp {

struct Limits {
  std::size_t max_path = 1 << 14;           // configurations along one branch
  std::size_t max_configurations = 1 << 22; // distinct configurations explored
  std::size_t max_traces = 1 << 20;
};

// One progression step: an ontic action, or feedback `feedback` of an
// epistemic action.
struct Choice {
  ActionRef action;
  std::optional<std::size_t> feedback;
  friend bool operator==(const Choice&, const Choice&) = default;
};

struct Trace {
  std::vector<KnowledgeState> states;  // states[0] is the initial knowledge state
  std::vector<Choice> choices;         // choices[i] leads from states[i] to states[i+1]
};

std::string to_string(const Trace& trace, const PlanningProblem& problem);

struct TraceOutcome {
  std::size_t traces = 0;         // finite traces visited
  std::optional<Trace> infinite;  // prefix up to a repeated configuration
  bool finite() const { return !infinite.has_value(); }
};

// Visits every finite trace of pi from m0. Stops early when visit returns
// false, or when a branch revisits a configuration (reported as infinite).
// Throws LimitExceeded when a budget in `limits` runs out.
TraceOutcome for_each_trace(const Kbp& pi, const PlanningProblem& problem, const KnowledgeState& m0,
                            const std::function<bool(const Trace&)>& visit, const Limits& limits = {});

struct TraceSet {
  std::vector<Trace> traces;
  std::optional<Trace> infinite;
  bool finite() const { return !infinite.has_value(); }
};

TraceSet enumerate_traces(const Kbp& pi, const PlanningProblem& problem, const Limits& limits = {});
TraceSet enumerate_traces(const Kbp& pi, const PlanningProblem& problem, const KnowledgeState& m0,
                          const Limits& limits = {});

struct Verdict {
  enum class Kind : std::uint8_t { kValid, kInvalid, kNonTerminating };
  Kind kind = Kind::kValid;
  std::optional<Trace> trace;  // counterexample or nonterminating prefix
  std::size_t configurations = 0;
  bool valid() const { return kind == Kind::kValid; }
};

const char* to_string(Verdict::Kind kind);

Verdict verify_plan(const PlanningProblem& problem, const Kbp& pi, const Limits& limits = {});
Verdict verify_plan(const PlanningProblem& problem, const Kbp& pi, const KnowledgeState& m0,
                    const Limits& limits = {});

enum class Equivalence : std::uint8_t { kEquivalent, kDifferent, kNonTerminating };

// Equality of the sets of knowledge-state sequences (choices ignored).
Equivalence equivalent_in(const Kbp& pi, const Kbp& pi2, const PlanningProblem& problem,
                          const KnowledgeState& m0, const Limits& limits = {});
Equivalence equivalent_in(const Kbp& pi, const Kbp& pi2, const PlanningProblem& problem,
                          const Limits& limits = {});

// Control part of a configuration: a stack of programs still to run.
// Identical stacks get identical ids; id 0 is the empty stack.
class ContinuationTable {
 public:
  using Id = std::uint32_t;
  static constexpr Id kDone = 0;

  ContinuationTable();
  Id push(const Kbp& head, Id tail);
  const Kbp& head(Id id) const { return entries_[id].head; }
  Id tail(Id id) const { return entries_[id].tail; }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    Kbp head;
    Id tail;
  };
  struct KeyHash {
    std::size_t operator()(const std::pair<const void*, Id>& k) const;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::pair<const void*, Id>, Id, KeyHash> index_;
};

// Successor configurations of (cont, m); `choice` is set on progression steps.
struct Successor {
  ContinuationTable::Id cont;
  KnowledgeState m;
  std::optional<Choice> choice;
};

// Expands one configuration. pi must be linked. Returns false on a terminal
// configuration (empty stack).
bool expand(ContinuationTable& table, ContinuationTable::Id cont, const KnowledgeState& m,
            const PlanningProblem& problem, std::vector<Successor>& out);

struct ConfigKey {
  ContinuationTable::Id cont;
  KnowledgeState m;
  friend bool operator==(const ConfigKey&, const ConfigKey&) = default;
};

struct ConfigKeyHash {
  std::size_t operator()(const ConfigKey& k) const { return k.m.hash() * 1000003u ^ k.cont; }
};

}  // namespace kbp
