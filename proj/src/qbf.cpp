#include "kbpkit/qbf.hpp"

#include "kbpkit/error.hpp"

namespace kbp {

void validate_qbf(const Qbf& psi) {
  std::uint64_t seen = 0;
  for (const auto& block : psi.prefix) {
    for (std::size_t v : block.vars) {
      if (v >= psi.variables.size()) throw ValidationError("quantified variable out of range");
      if (seen & variable_bit(v)) {
        throw ValidationError("variable " + psi.variables.name(v) + " is quantified twice");
      }
      seen |= variable_bit(v);
    }
  }
  if (!is_objective(psi.matrix)) throw ValidationError("QBF matrix must be propositional");
  const std::uint64_t free = variables_of(psi.matrix) & ~seen;
  if (free != 0) {
    for (std::size_t i = 0; i < 64; ++i) {
      if (free & variable_bit(i)) {
        const std::string name = i < psi.variables.size() ? psi.variables.name(i) : "x" + std::to_string(i + 1);
        throw ValidationError("matrix variable " + name + " is not quantified");
      }
    }
  }
}

namespace {

bool eval_rec(const Qbf& psi, const std::vector<std::pair<bool, std::size_t>>& order,
              std::size_t pos, State s) {
  if (pos == order.size()) return evaluate(psi.matrix, s);
  const auto [existential, v] = order[pos];
  const bool lo = eval_rec(psi, order, pos + 1, s.with(v, false));
  if (existential && lo) return true;
  if (!existential && !lo) return false;
  return eval_rec(psi, order, pos + 1, s.with(v, true));
}

}  // namespace

bool qbf_eval(const Qbf& psi) {
  validate_qbf(psi);
  std::vector<std::pair<bool, std::size_t>> order;
  for (const auto& block : psi.prefix) {
    for (std::size_t v : block.vars) order.emplace_back(block.existential, v);
  }
  if (order.size() > 20) throw LimitExceeded("qbf_eval: more than 20 quantified variables");
  return eval_rec(psi, order, 0, State{});
}

Qbf normalize_prefix(const Qbf& psi) {
  Qbf out = psi;
  out.prefix.clear();
  for (const auto& block : psi.prefix) {
    if (block.vars.empty()) continue;
    if (!out.prefix.empty() && out.prefix.back().existential == block.existential) {
      auto& vars = out.prefix.back().vars;
      vars.insert(vars.end(), block.vars.begin(), block.vars.end());
    } else {
      out.prefix.push_back(block);
    }
  }
  return out;
}

std::string qbf_shape(const Qbf& psi) {
  std::string shape;
  for (const auto& block : normalize_prefix(psi).prefix) shape += block.existential ? 'E' : 'A';
  return shape;
}

}  // namespace kbp
