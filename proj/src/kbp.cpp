#include "kbpkit/kbp.hpp"

#include <set>

#include "kbpkit/error.hpp"

namespace kbp {

struct Kbp::Node {
  Kind kind = Kind::kEmpty;
  std::string action;
  std::optional<ActionRef> ref;
  Formula condition;
  Kbp first;
  Kbp second;

  Node() : first(nullptr), second(nullptr) {}
};

namespace {

const Kbp& empty_program() {
  static const Kbp k = Kbp::empty();
  return k;
}

}  // namespace

Kbp::Kbp() : Kbp(empty_program()) {}

Kbp Kbp::empty() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kEmpty;
  return Kbp(std::move(n));
}

Kbp Kbp::act(std::string action, std::optional<ActionRef> ref) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kAct;
  n->action = std::move(action);
  n->ref = ref;
  return Kbp(std::move(n));
}

Kbp Kbp::seq(Kbp first, Kbp second) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kSeq;
  n->first = std::move(first);
  n->second = std::move(second);
  return Kbp(std::move(n));
}

Kbp Kbp::branch(Formula condition, Kbp then_branch, Kbp else_branch) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kIf;
  n->condition = std::move(condition);
  n->first = std::move(then_branch);
  n->second = std::move(else_branch);
  return Kbp(std::move(n));
}

Kbp Kbp::loop(Formula condition, Kbp body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kWhile;
  n->condition = std::move(condition);
  n->first = std::move(body);
  return Kbp(std::move(n));
}

Kbp::Kind Kbp::kind() const { return node_->kind; }
const std::string& Kbp::action() const { return node_->action; }
const std::optional<ActionRef>& Kbp::ref() const { return node_->ref; }
const Formula& Kbp::condition() const { return node_->condition; }
const Kbp& Kbp::first() const { return node_->first; }
const Kbp& Kbp::second() const { return node_->second; }
const Kbp& Kbp::then_branch() const { return node_->first; }
const Kbp& Kbp::else_branch() const { return node_->second; }
const Kbp& Kbp::body() const { return node_->first; }

bool operator==(const Kbp& a, const Kbp& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kbp::Kind::kEmpty:
      return true;
    case Kbp::Kind::kAct:
      return a.action() == b.action();
    case Kbp::Kind::kSeq:
      return a.first() == b.first() && a.second() == b.second();
    case Kbp::Kind::kIf:
      return a.condition() == b.condition() && a.then_branch() == b.then_branch() &&
             a.else_branch() == b.else_branch();
    case Kbp::Kind::kWhile:
      return a.condition() == b.condition() && a.body() == b.body();
  }
  return false;
}

Kbp sequence(const std::vector<Kbp>& parts) {
  if (parts.empty()) return Kbp::empty();
  Kbp out = parts.back();
  for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) out = Kbp::seq(*it, out);
  return out;
}

std::size_t kbp_size(const Kbp& pi) {
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty:
      return 0;
    case Kbp::Kind::kAct:
      return 1;
    case Kbp::Kind::kSeq:
      return kbp_size(pi.first()) + kbp_size(pi.second());
    case Kbp::Kind::kIf:
      return formula_size(pi.condition()) + kbp_size(pi.then_branch()) + kbp_size(pi.else_branch());
    case Kbp::Kind::kWhile:
      return formula_size(pi.condition()) + kbp_size(pi.body());
  }
  return 0;
}

std::size_t action_occurrences(const Kbp& pi) {
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty:
      return 0;
    case Kbp::Kind::kAct:
      return 1;
    case Kbp::Kind::kWhile:
      return action_occurrences(pi.body());
    default:
      return action_occurrences(pi.first()) + action_occurrences(pi.second());
  }
}

bool is_while_free(const Kbp& pi) {
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty:
    case Kbp::Kind::kAct:
      return true;
    case Kbp::Kind::kWhile:
      return false;
    default:
      return is_while_free(pi.first()) && is_while_free(pi.second());
  }
}

namespace {

void flatten_seq(const Kbp& pi, std::vector<Kbp>& out) {
  if (pi.kind() == Kbp::Kind::kSeq) {
    flatten_seq(pi.first(), out);
    flatten_seq(pi.second(), out);
  } else {
    out.push_back(pi);
  }
}

void print(const Kbp& pi, const VariableTable& vars, int indent, std::string& out);

void print_block(const Kbp& pi, const VariableTable& vars, int indent, std::string& out) {
  std::vector<Kbp> parts;
  flatten_seq(pi, parts);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    print(parts[i], vars, indent, out);
    if (i + 1 < parts.size()) out += ";";
    out += "\n";
  }
}

void print(const Kbp& pi, const VariableTable& vars, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty:
      out += pad + "skip";
      return;
    case Kbp::Kind::kAct:
      out += pad + pi.action();
      return;
    case Kbp::Kind::kSeq:
      // Only reached for nested sequences inside a block; print inline.
      print(pi.first(), vars, indent, out);
      out += ";\n";
      print(pi.second(), vars, indent, out);
      return;
    case Kbp::Kind::kIf:
      out += pad + "if " + to_string(pi.condition(), vars) + " then\n";
      print_block(pi.then_branch(), vars, indent + 1, out);
      if (!pi.else_branch().is_empty()) {
        out += pad + "else\n";
        print_block(pi.else_branch(), vars, indent + 1, out);
      }
      out += pad + "endif";
      return;
    case Kbp::Kind::kWhile:
      out += pad + "while " + to_string(pi.condition(), vars) + " do\n";
      print_block(pi.body(), vars, indent + 1, out);
      out += pad + "endwhile";
      return;
  }
}

}  // namespace

std::string to_string(const Kbp& pi, const VariableTable& vars) {
  std::string out;
  print_block(pi, vars, 0, out);
  return out;
}

Kbp link(const Kbp& pi, const PlanningProblem& problem) {
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty:
      return pi;
    case Kbp::Kind::kAct:
      return Kbp::act(pi.action(), problem.action(pi.action()));
    case Kbp::Kind::kSeq:
      return Kbp::seq(link(pi.first(), problem), link(pi.second(), problem));
    case Kbp::Kind::kIf:
      if (!is_sknnf(pi.condition())) throw ValidationError("branching condition is not in SKNNF");
      return Kbp::branch(pi.condition(), link(pi.then_branch(), problem),
                         link(pi.else_branch(), problem));
    case Kbp::Kind::kWhile:
      if (!is_sknnf(pi.condition())) throw ValidationError("loop condition is not in SKNNF");
      return Kbp::loop(pi.condition(), link(pi.body(), problem));
  }
  return pi;
}

namespace {

// "Last action executed" along a path; nullopt before any action.
using LastAction = std::optional<ActionRef>;

bool condition_is_feedback_of(const Formula& condition, const LastAction& last,
                              const PlanningProblem& problem) {
  if (!last || last->kind != ActionKind::kEpistemic) return false;
  if (condition.op() != Connective::kKnow) return false;
  for (const auto& phi : problem.epistemic[last->index].feedbacks) {
    if (phi == condition.lhs()) return true;
  }
  return false;
}

// Returns the set of possible last actions after running pi from any of the
// given ones, or nullopt if some branching point violates the policy form.
std::optional<std::set<LastAction>> walk(const Kbp& pi, const std::set<LastAction>& before,
                                         const PlanningProblem& problem) {
  switch (pi.kind()) {
    case Kbp::Kind::kEmpty:
      return before;
    case Kbp::Kind::kAct: {
      auto ref = pi.ref() ? pi.ref() : problem.find_action(pi.action());
      if (!ref) return std::nullopt;
      return std::set<LastAction>{*ref};
    }
    case Kbp::Kind::kSeq: {
      auto mid = walk(pi.first(), before, problem);
      if (!mid) return std::nullopt;
      return walk(pi.second(), *mid, problem);
    }
    case Kbp::Kind::kIf: {
      for (const auto& last : before) {
        if (!condition_is_feedback_of(pi.condition(), last, problem)) return std::nullopt;
      }
      auto t = walk(pi.then_branch(), before, problem);
      auto e = walk(pi.else_branch(), before, problem);
      if (!t || !e) return std::nullopt;
      t->insert(e->begin(), e->end());
      return t;
    }
    case Kbp::Kind::kWhile: {
      // The condition is evaluated on entry and after every iteration.
      std::set<LastAction> at_test = before;
      while (true) {
        for (const auto& last : at_test) {
          if (!condition_is_feedback_of(pi.condition(), last, problem)) return std::nullopt;
        }
        auto after_body = walk(pi.body(), at_test, problem);
        if (!after_body) return std::nullopt;
        auto grown = at_test;
        grown.insert(after_body->begin(), after_body->end());
        if (grown == at_test) return at_test;
        at_test = std::move(grown);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

bool is_standard_policy(const Kbp& pi, const PlanningProblem& problem) {
  return walk(pi, {LastAction{}}, problem).has_value();
}

}  // namespace kbp
