#pragma once

#include <cstddef>
#include <vector>

#include "kbpkit/formula.hpp"
#include "kbpkit/state.hpp"

namespace kbp {

struct QuantifierBlock {
  bool existential = true;
  std::vector<std::size_t> vars;
};

// Prenex QBF. Variables are numbered in prefix order.
struct Qbf {
  VariableTable variables;
  std::vector<QuantifierBlock> prefix;
  Formula matrix;
};

// Throws ValidationError unless every matrix variable is quantified exactly once.
void validate_qbf(const Qbf& psi);

// Truth value by exhaustive recursion over the prefix. Throws LimitExceeded
// above 20 variables.
bool qbf_eval(const Qbf& psi);

// Block shape such as "EA" or "EAE"; adjacent blocks of the same quantifier
// are merged first.
std::string qbf_shape(const Qbf& psi);

// Merges adjacent blocks of the same quantifier and drops empty blocks.
Qbf normalize_prefix(const Qbf& psi);

}  // namespace kbp
