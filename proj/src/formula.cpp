#include "kbpkit/formula.hpp"

#include "kbpkit/error.hpp"

namespace kbp {

struct Formula::Node {
  Connective op;
  std::size_t var = 0;
  Formula lhs;
  Formula rhs;
  std::size_t hash = 0;

  Node(Connective o, std::size_t v) : op(o), var(v), lhs(nullptr), rhs(nullptr) {}
  Node(Connective o, Formula l, Formula r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

const Formula& true_constant() {
  static const Formula f = Formula::truth();
  return f;
}

}  // namespace

Formula::Formula() : Formula(true_constant()) {}

Formula Formula::truth() {
  auto n = std::make_shared<Node>(Connective::kTrue, 0);
  n->hash = 11;
  return Formula(std::move(n));
}

Formula Formula::falsity() {
  auto n = std::make_shared<Node>(Connective::kFalse, 0);
  n->hash = 13;
  return Formula(std::move(n));
}

Formula Formula::var(std::size_t index) {
  if (index >= kMaxVariables) throw MalformedFormula("variable index out of range");
  auto n = std::make_shared<Node>(Connective::kVar, index);
  n->hash = mix(17, index);
  return Formula(std::move(n));
}

Formula Formula::primed(std::size_t index) {
  if (index >= kMaxVariables) throw MalformedFormula("variable index out of range");
  auto n = std::make_shared<Node>(Connective::kPrimed, index);
  n->hash = mix(19, index);
  return Formula(std::move(n));
}

namespace {

template <class NodeT>
std::shared_ptr<NodeT> make_compound(Connective op, Formula lhs, Formula rhs, std::size_t lh,
                                     std::size_t rh) {
  auto n = std::make_shared<NodeT>(op, std::move(lhs), std::move(rhs));
  n->hash = mix(mix(static_cast<std::size_t>(op) * 31 + 7, lh), rh);
  return n;
}

}  // namespace

Formula Formula::negation(Formula operand) {
  auto h = operand.node_->hash;
  return Formula(make_compound<Node>(Connective::kNot, std::move(operand), Formula(nullptr), h, 0));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  auto lh = lhs.node_->hash, rh = rhs.node_->hash;
  return Formula(make_compound<Node>(Connective::kAnd, std::move(lhs), std::move(rhs), lh, rh));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  auto lh = lhs.node_->hash, rh = rhs.node_->hash;
  return Formula(make_compound<Node>(Connective::kOr, std::move(lhs), std::move(rhs), lh, rh));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  auto lh = lhs.node_->hash, rh = rhs.node_->hash;
  return Formula(make_compound<Node>(Connective::kImplies, std::move(lhs), std::move(rhs), lh, rh));
}

Formula Formula::equivalence(Formula lhs, Formula rhs) {
  auto lh = lhs.node_->hash, rh = rhs.node_->hash;
  return Formula(make_compound<Node>(Connective::kIff, std::move(lhs), std::move(rhs), lh, rh));
}

Formula Formula::know(Formula objective) {
  if (!is_objective(objective)) {
    throw MalformedFormula("K must be applied to an objective formula (no nesting, no primes)");
  }
  auto h = objective.node_->hash;
  return Formula(make_compound<Node>(Connective::kKnow, std::move(objective), Formula(nullptr), h, 0));
}

Connective Formula::op() const { return node_->op; }
std::size_t Formula::var() const { return node_->var; }
const Formula& Formula::lhs() const { return node_->lhs; }
const Formula& Formula::rhs() const { return node_->rhs; }

bool Formula::is_binary() const {
  switch (op()) {
    case Connective::kAnd:
    case Connective::kOr:
    case Connective::kImplies:
    case Connective::kIff:
      return true;
    default:
      return false;
  }
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.node_->hash != b.node_->hash || a.op() != b.op()) return false;
  switch (a.op()) {
    case Connective::kTrue:
    case Connective::kFalse:
      return true;
    case Connective::kVar:
    case Connective::kPrimed:
      return a.var() == b.var();
    case Connective::kNot:
    case Connective::kKnow:
      return a.lhs() == b.lhs();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

std::size_t Formula::hash() const { return node_->hash; }

std::size_t FormulaHash::operator()(const Formula& f) const { return f.hash(); }

Formula operator!(const Formula& f) { return Formula::negation(f); }
Formula operator&(const Formula& a, const Formula& b) { return Formula::conjunction(a, b); }
Formula operator|(const Formula& a, const Formula& b) { return Formula::disjunction(a, b); }

namespace {

Formula fold(std::span<const Formula> parts, bool conjunctive) {
  if (parts.empty()) return conjunctive ? Formula::truth() : Formula::falsity();
  if (parts.size() == 1) return parts.front();
  auto mid = parts.size() / 2;
  auto l = fold(parts.first(mid), conjunctive);
  auto r = fold(parts.subspan(mid), conjunctive);
  return conjunctive ? Formula::conjunction(l, r) : Formula::disjunction(l, r);
}

}  // namespace

Formula conjoin(std::span<const Formula> parts) { return fold(parts, true); }
Formula disjoin(std::span<const Formula> parts) { return fold(parts, false); }

Formula literal(std::size_t index, bool value) {
  return value ? Formula::var(index) : Formula::negation(Formula::var(index));
}

Formula frame_axioms(std::span<const std::size_t> vars) {
  std::vector<Formula> parts;
  parts.reserve(vars.size());
  for (auto v : vars) parts.push_back(Formula::equivalence(Formula::primed(v), Formula::var(v)));
  return conjoin(parts);
}

std::size_t formula_size(const Formula& f) {
  switch (f.op()) {
    case Connective::kTrue:
    case Connective::kFalse:
    case Connective::kVar:
    case Connective::kPrimed:
      return 1;
    case Connective::kNot:
    case Connective::kKnow:
      return 1 + formula_size(f.lhs());
    default:
      return 1 + formula_size(f.lhs()) + formula_size(f.rhs());
  }
}

bool is_objective(const Formula& f) {
  switch (f.op()) {
    case Connective::kTrue:
    case Connective::kFalse:
    case Connective::kVar:
      return true;
    case Connective::kPrimed:
    case Connective::kKnow:
      return false;
    case Connective::kNot:
      return is_objective(f.lhs());
    default:
      return is_objective(f.lhs()) && is_objective(f.rhs());
  }
}

bool has_primed(const Formula& f) {
  switch (f.op()) {
    case Connective::kPrimed:
      return true;
    case Connective::kTrue:
    case Connective::kFalse:
    case Connective::kVar:
      return false;
    case Connective::kNot:
    case Connective::kKnow:
      return has_primed(f.lhs());
    default:
      return has_primed(f.lhs()) || has_primed(f.rhs());
  }
}

bool is_purely_subjective(const Formula& f) {
  switch (f.op()) {
    case Connective::kTrue:
    case Connective::kFalse:
      return true;
    case Connective::kKnow:
      return true;  // constructor guarantees an objective operand
    case Connective::kVar:
    case Connective::kPrimed:
      return false;
    case Connective::kNot:
      return is_purely_subjective(f.lhs());
    default:
      return is_purely_subjective(f.lhs()) && is_purely_subjective(f.rhs());
  }
}

bool is_sknnf(const Formula& f) {
  switch (f.op()) {
    case Connective::kTrue:
    case Connective::kKnow:
      return true;
    case Connective::kNot:
      return f.lhs().op() == Connective::kKnow;
    case Connective::kAnd:
    case Connective::kOr:
      return is_sknnf(f.lhs()) && is_sknnf(f.rhs());
    default:
      return false;
  }
}

bool is_positive(const Formula& f) {
  switch (f.op()) {
    case Connective::kTrue:
    case Connective::kKnow:
      return true;
    case Connective::kNot:
      return false;
    case Connective::kAnd:
    case Connective::kOr:
      return is_positive(f.lhs()) && is_positive(f.rhs());
    default:
      throw MalformedFormula("is_positive expects an SKNNF formula");
  }
}

std::uint64_t variables_of(const Formula& f) {
  switch (f.op()) {
    case Connective::kVar:
      return variable_bit(f.var());
    case Connective::kTrue:
    case Connective::kFalse:
    case Connective::kPrimed:
      return 0;
    case Connective::kNot:
    case Connective::kKnow:
      return variables_of(f.lhs());
    default:
      return variables_of(f.lhs()) | variables_of(f.rhs());
  }
}

std::uint64_t primed_variables_of(const Formula& f) {
  switch (f.op()) {
    case Connective::kPrimed:
      return variable_bit(f.var());
    case Connective::kTrue:
    case Connective::kFalse:
    case Connective::kVar:
      return 0;
    case Connective::kNot:
    case Connective::kKnow:
      return primed_variables_of(f.lhs());
    default:
      return primed_variables_of(f.lhs()) | primed_variables_of(f.rhs());
  }
}

namespace {

bool eval_pair(const Formula& f, std::uint64_t cur, std::uint64_t next) {
  switch (f.op()) {
    case Connective::kTrue:
      return true;
    case Connective::kFalse:
      return false;
    case Connective::kVar:
      return (cur & variable_bit(f.var())) != 0;
    case Connective::kPrimed:
      return (next & variable_bit(f.var())) != 0;
    case Connective::kNot:
      return !eval_pair(f.lhs(), cur, next);
    case Connective::kAnd:
      return eval_pair(f.lhs(), cur, next) && eval_pair(f.rhs(), cur, next);
    case Connective::kOr:
      return eval_pair(f.lhs(), cur, next) || eval_pair(f.rhs(), cur, next);
    case Connective::kImplies:
      return !eval_pair(f.lhs(), cur, next) || eval_pair(f.rhs(), cur, next);
    case Connective::kIff:
      return eval_pair(f.lhs(), cur, next) == eval_pair(f.rhs(), cur, next);
    case Connective::kKnow:
      throw MalformedFormula("K atom evaluated at a single state");
  }
  return false;
}

}  // namespace

bool evaluate(const Formula& objective, State s) {
  return eval_pair(objective, s.bits(), 0);
}

bool evaluate(const Formula& theory, State current, State next) {
  return eval_pair(theory, current.bits(), next.bits());
}

namespace {

bool knows(const KnowledgeState& m, const Formula& objective) {
  for (State s : m) {
    if (!eval_pair(objective, s.bits(), 0)) return false;
  }
  return true;
}

bool holds_nonempty(const KnowledgeState& m, const Formula& f) {
  switch (f.op()) {
    case Connective::kTrue:
      return true;
    case Connective::kFalse:
      return false;
    case Connective::kKnow:
      return knows(m, f.lhs());
    case Connective::kNot:
      return !holds_nonempty(m, f.lhs());
    case Connective::kAnd:
      return holds_nonempty(m, f.lhs()) && holds_nonempty(m, f.rhs());
    case Connective::kOr:
      return holds_nonempty(m, f.lhs()) || holds_nonempty(m, f.rhs());
    case Connective::kImplies:
      return !holds_nonempty(m, f.lhs()) || holds_nonempty(m, f.rhs());
    case Connective::kIff:
      return holds_nonempty(m, f.lhs()) == holds_nonempty(m, f.rhs());
    case Connective::kVar:
    case Connective::kPrimed:
      throw MalformedFormula("objective subformula outside the scope of K");
  }
  return false;
}

Formula sknnf(const Formula& f, bool negated) {
  switch (f.op()) {
    case Connective::kTrue:
      return negated ? Formula::know(Formula::falsity()) : f;
    case Connective::kFalse:
      return negated ? Formula::truth() : Formula::know(Formula::falsity());
    case Connective::kKnow:
      return negated ? Formula::negation(f) : f;
    case Connective::kNot:
      return sknnf(f.lhs(), !negated);
    case Connective::kAnd:
      return negated ? Formula::disjunction(sknnf(f.lhs(), true), sknnf(f.rhs(), true))
                     : Formula::conjunction(sknnf(f.lhs(), false), sknnf(f.rhs(), false));
    case Connective::kOr:
      return negated ? Formula::conjunction(sknnf(f.lhs(), true), sknnf(f.rhs(), true))
                     : Formula::disjunction(sknnf(f.lhs(), false), sknnf(f.rhs(), false));
    case Connective::kImplies:
      return negated ? Formula::conjunction(sknnf(f.lhs(), false), sknnf(f.rhs(), true))
                     : Formula::disjunction(sknnf(f.lhs(), true), sknnf(f.rhs(), false));
    case Connective::kIff:
      if (negated) {
        return Formula::disjunction(
            Formula::conjunction(sknnf(f.lhs(), false), sknnf(f.rhs(), true)),
            Formula::conjunction(sknnf(f.lhs(), true), sknnf(f.rhs(), false)));
      }
      return Formula::disjunction(
          Formula::conjunction(sknnf(f.lhs(), false), sknnf(f.rhs(), false)),
          Formula::conjunction(sknnf(f.lhs(), true), sknnf(f.rhs(), true)));
    case Connective::kVar:
    case Connective::kPrimed:
      throw MalformedFormula("formula is not purely subjective");
  }
  return f;
}

Formula nnf(const Formula& f, bool negated) {
  switch (f.op()) {
    case Connective::kTrue:
      return negated ? Formula::falsity() : f;
    case Connective::kFalse:
      return negated ? Formula::truth() : f;
    case Connective::kVar:
    case Connective::kPrimed:
      return negated ? Formula::negation(f) : f;
    case Connective::kNot:
      return nnf(f.lhs(), !negated);
    case Connective::kAnd:
      return negated ? Formula::disjunction(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : Formula::conjunction(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Connective::kOr:
      return negated ? Formula::conjunction(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : Formula::disjunction(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Connective::kImplies:
      return negated ? Formula::conjunction(nnf(f.lhs(), false), nnf(f.rhs(), true))
                     : Formula::disjunction(nnf(f.lhs(), true), nnf(f.rhs(), false));
    case Connective::kIff:
      if (negated) {
        return Formula::disjunction(Formula::conjunction(nnf(f.lhs(), false), nnf(f.rhs(), true)),
                                    Formula::conjunction(nnf(f.lhs(), true), nnf(f.rhs(), false)));
      }
      return Formula::disjunction(Formula::conjunction(nnf(f.lhs(), false), nnf(f.rhs(), false)),
                                  Formula::conjunction(nnf(f.lhs(), true), nnf(f.rhs(), true)));
    case Connective::kKnow:
      throw MalformedFormula("objective_nnf applied to an epistemic formula");
  }
  return f;
}

}  // namespace

bool holds(const KnowledgeState& m, const Formula& phi) {
  if (m.empty()) throw ContractViolation("holds() on an empty knowledge state");
  return holds_nonempty(m, phi);
}

Formula to_sknnf(const Formula& phi) { return sknnf(phi, false); }

Formula objective_nnf(const Formula& phi) { return nnf(phi, false); }

Formula substitute_literals(const Formula& f,
                            const std::function<Formula(std::size_t, bool)>& replace) {
  switch (f.op()) {
    case Connective::kTrue:
    case Connective::kFalse:
      return f;
    case Connective::kVar:
      return replace(f.var(), true);
    case Connective::kNot:
      if (f.lhs().op() == Connective::kVar) return replace(f.lhs().var(), false);
      throw MalformedFormula("substitute_literals expects negation normal form");
    case Connective::kAnd:
      return Formula::conjunction(substitute_literals(f.lhs(), replace),
                                  substitute_literals(f.rhs(), replace));
    case Connective::kOr:
      return Formula::disjunction(substitute_literals(f.lhs(), replace),
                                  substitute_literals(f.rhs(), replace));
    default:
      throw MalformedFormula("substitute_literals expects negation normal form");
  }
}

Formula remap_variables(const Formula& f, const std::function<std::size_t(std::size_t)>& map) {
  switch (f.op()) {
    case Connective::kTrue:
    case Connective::kFalse:
      return f;
    case Connective::kVar:
      return Formula::var(map(f.var()));
    case Connective::kPrimed:
      return Formula::primed(map(f.var()));
    case Connective::kNot:
      return Formula::negation(remap_variables(f.lhs(), map));
    case Connective::kKnow:
      return Formula::know(remap_variables(f.lhs(), map));
    case Connective::kAnd:
      return Formula::conjunction(remap_variables(f.lhs(), map), remap_variables(f.rhs(), map));
    case Connective::kOr:
      return Formula::disjunction(remap_variables(f.lhs(), map), remap_variables(f.rhs(), map));
    case Connective::kImplies:
      return Formula::implication(remap_variables(f.lhs(), map), remap_variables(f.rhs(), map));
    case Connective::kIff:
      return Formula::equivalence(remap_variables(f.lhs(), map), remap_variables(f.rhs(), map));
  }
  return f;
}

namespace {

// Binding strength; larger binds tighter.
int precedence(Connective op) {
  switch (op) {
    case Connective::kIff:
      return 1;
    case Connective::kImplies:
      return 2;
    case Connective::kOr:
      return 3;
    case Connective::kAnd:
      return 4;
    case Connective::kNot:
      return 5;
    default:
      return 6;
  }
}

void print(const Formula& f, const VariableTable& vars, std::string& out);

void print_operand(const Formula& f, bool parenthesize, const VariableTable& vars,
                   std::string& out) {
  if (parenthesize) out += '(';
  print(f, vars, out);
  if (parenthesize) out += ')';
}

std::string var_name(std::size_t index, const VariableTable& vars) {
  if (index < vars.size()) return vars.name(index);
  return "x" + std::to_string(index + 1);
}

void print(const Formula& f, const VariableTable& vars, std::string& out) {
  switch (f.op()) {
    case Connective::kTrue:
      out += "true";
      return;
    case Connective::kFalse:
      out += "false";
      return;
    case Connective::kVar:
      out += var_name(f.var(), vars);
      return;
    case Connective::kPrimed:
      out += var_name(f.var(), vars);
      out += '\'';
      return;
    case Connective::kKnow:
      out += "K(";
      print(f.lhs(), vars, out);
      out += ')';
      return;
    case Connective::kNot:
      out += '!';
      print_operand(f.lhs(), precedence(f.lhs().op()) < precedence(Connective::kNot), vars, out);
      return;
    default:
      break;
  }
  const int p = precedence(f.op());
  const int lp = precedence(f.lhs().op());
  const int rp = precedence(f.rhs().op());
  // & | <-> associate to the left, -> to the right.
  const bool right_assoc = f.op() == Connective::kImplies;
  print_operand(f.lhs(), right_assoc ? lp <= p : lp < p, vars, out);
  switch (f.op()) {
    case Connective::kAnd:
      out += " & ";
      break;
    case Connective::kOr:
      out += " | ";
      break;
    case Connective::kImplies:
      out += " -> ";
      break;
    default:
      out += " <-> ";
      break;
  }
  print_operand(f.rhs(), right_assoc ? rp < p : rp <= p, vars, out);
}

}  // namespace

std::string to_string(const Formula& f, const VariableTable& vars) {
  std::string out;
  print(f, vars, out);
  return out;
}

}  // namespace kbp
