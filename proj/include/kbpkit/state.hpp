#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kbp {

inline constexpr std::size_t kMaxVariables = 64;

// Variable i lives at bit 63 - i, so the numeric order of states is the
// lexicographic order of their bit strings read from the first variable.
constexpr std::uint64_t variable_bit(std::size_t index) {
  return std::uint64_t{1} << (63 - index);
}

constexpr std::uint64_t variables_mask(std::size_t nvars) {
  return nvars == 0 ? 0 : ~std::uint64_t{0} << (64 - nvars);
}

// One truth assignment over the declared variables.
class State {
 public:
  constexpr State() = default;
  constexpr explicit State(std::uint64_t bits) : bits_(bits) {}

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool get(std::size_t index) const { return (bits_ & variable_bit(index)) != 0; }
  constexpr State with(std::size_t index, bool value) const {
    return State(value ? bits_ | variable_bit(index) : bits_ & ~variable_bit(index));
  }

  // Parses "101" as x1=1, x2=0, x3=1.
  static State from_string(std::string_view bits);

  friend constexpr auto operator<=>(State, State) = default;

 private:
  std::uint64_t bits_ = 0;
};

std::string to_string(State s, std::size_t nvars);

// A set of states in canonical (ascending) order. Knowledge states proper are
// nonempty; the empty set is representable so that Mods(phi) of an
// unsatisfiable phi has a value.
class KnowledgeState {
 public:
  using const_iterator = std::vector<State>::const_iterator;

  KnowledgeState() = default;
  explicit KnowledgeState(std::vector<State> states);
  KnowledgeState(std::initializer_list<State> states);
  static KnowledgeState from_strings(std::initializer_list<std::string_view> states);

  // Every state over nvars variables.
  static KnowledgeState all(std::size_t nvars);

  bool empty() const { return states_.empty(); }
  std::size_t size() const { return states_.size(); }
  const_iterator begin() const { return states_.begin(); }
  const_iterator end() const { return states_.end(); }
  const State& operator[](std::size_t i) const { return states_[i]; }
  std::span<const State> states() const { return states_; }

  bool contains(State s) const { return std::binary_search(states_.begin(), states_.end(), s); }
  bool is_subset_of(const KnowledgeState& other) const;
  std::size_t hash() const;

  KnowledgeState set_union(const KnowledgeState& other) const;
  KnowledgeState intersection(const KnowledgeState& other) const;

  friend bool operator==(const KnowledgeState&, const KnowledgeState&) = default;
  friend auto operator<=>(const KnowledgeState& a, const KnowledgeState& b) {
    return std::lexicographical_compare_three_way(a.states_.begin(), a.states_.end(),
                                                  b.states_.begin(), b.states_.end());
  }

 private:
  std::vector<State> states_;
};

struct KnowledgeStateHash {
  std::size_t operator()(const KnowledgeState& m) const { return m.hash(); }
};

// "{100, 101, 110}"
std::string to_string(const KnowledgeState& m, std::size_t nvars);

// Declared variable order of a problem. Names are unique.
class VariableTable {
 public:
  VariableTable() = default;
  VariableTable(std::initializer_list<std::string> names);

  // Adds a variable, or returns the existing index of that name.
  std::size_t declare(const std::string& name);
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  friend bool operator==(const VariableTable& a, const VariableTable& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace kbp
