#include "kbpkit/state.hpp"

#include <iterator>

#include "kbpkit/error.hpp"

namespace kbp {

State State::from_string(std::string_view bits) {
  if (bits.size() > kMaxVariables) throw ContractViolation("state wider than 64 variables");
  State s;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw ContractViolation("state string must be over {0,1}");
    s = s.with(i, bits[i] == '1');
  }
  return s;
}

std::string to_string(State s, std::size_t nvars) {
  std::string out(nvars, '0');
  for (std::size_t i = 0; i < nvars; ++i) {
    if (s.get(i)) out[i] = '1';
  }
  return out;
}

KnowledgeState::KnowledgeState(std::vector<State> states) : states_(std::move(states)) {
  std::sort(states_.begin(), states_.end());
  states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
}

KnowledgeState::KnowledgeState(std::initializer_list<State> states)
    : KnowledgeState(std::vector<State>(states)) {}

KnowledgeState KnowledgeState::from_strings(std::initializer_list<std::string_view> states) {
  std::vector<State> out;
  out.reserve(states.size());
  for (auto s : states) out.push_back(State::from_string(s));
  return KnowledgeState(std::move(out));
}

KnowledgeState KnowledgeState::all(std::size_t nvars) {
  if (nvars > 24) throw LimitExceeded("refusing to materialize 2^" + std::to_string(nvars) + " states");
  std::vector<State> out;
  out.reserve(std::size_t{1} << nvars);
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << nvars); ++i) {
    out.emplace_back(nvars == 0 ? 0 : i << (64 - nvars));
  }
  KnowledgeState m;
  m.states_ = std::move(out);  // already ascending
  return m;
}

bool KnowledgeState::is_subset_of(const KnowledgeState& other) const {
  return std::includes(other.states_.begin(), other.states_.end(), states_.begin(), states_.end());
}

std::size_t KnowledgeState::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ states_.size();
  for (State s : states_) {
    h ^= s.bits() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

KnowledgeState KnowledgeState::set_union(const KnowledgeState& other) const {
  KnowledgeState out;
  out.states_.reserve(states_.size() + other.states_.size());
  std::set_union(states_.begin(), states_.end(), other.states_.begin(), other.states_.end(),
                 std::back_inserter(out.states_));
  return out;
}

KnowledgeState KnowledgeState::intersection(const KnowledgeState& other) const {
  KnowledgeState out;
  std::set_intersection(states_.begin(), states_.end(), other.states_.begin(), other.states_.end(),
                        std::back_inserter(out.states_));
  return out;
}

std::string to_string(const KnowledgeState& m, std::size_t nvars) {
  std::string out = "{";
  bool first = true;
  for (State s : m) {
    if (!first) out += ", ";
    first = false;
    out += to_string(s, nvars);
  }
  out += "}";
  return out;
}

VariableTable::VariableTable(std::initializer_list<std::string> names) {
  for (const auto& n : names) declare(n);
}

std::size_t VariableTable::declare(const std::string& name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  if (names_.size() == kMaxVariables) throw ValidationError("more than 64 variables declared");
  index_.emplace(name, names_.size());
  names_.push_back(name);
  return names_.size() - 1;
}

std::optional<std::size_t> VariableTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t VariableTable::at(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw ValidationError("unknown variable '" + std::string(name) + "'");
  return *idx;
}

}  // namespace kbp
