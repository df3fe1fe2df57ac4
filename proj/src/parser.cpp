#include "kbpkit/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <set>

#include "kbpkit/error.hpp"

namespace kbp {

namespace {

enum class Tok : std::uint8_t {
  kIdent,
  kNumber,
  kPrime,
  kLParen,
  kRParen,
  kNot,
  kAnd,
  kOr,
  kImplies,
  kIff,
  kComma,
  kSemicolon,
  kColon,
  kEnd,
};

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line = 1, std::size_t column = 1)
      : text_(text), line_(line), column_(column) {
    advance();
  }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

  bool at(Tok kind) const { return current_.kind == kind; }
  bool at_word(std::string_view word) const {
    return current_.kind == Tok::kIdent && current_.text == word;
  }

  Token expect(Tok kind, const char* what) {
    if (!at(kind)) fail(std::string("expected ") + what);
    return next();
  }

  void expect_word(std::string_view word) {
    if (!at_word(word)) fail("expected '" + std::string(word) + "'");
    next();
  }

  [[noreturn]] void fail(const std::string& message) const {
    std::string found = current_.kind == Tok::kEnd ? "end of input" : "'" + std::string(current_.text) + "'";
    throw ParseError(message + ", found " + found, current_.line, current_.column);
  }

 private:
  void advance() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
    current_.line = line_;
    current_.column = column_;
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) {
      current_.kind = Tok::kEnd;
      current_.text = {};
      return;
    }
    const char c = text_[pos_];
    auto single = [&](Tok kind) {
      bump();
      current_.kind = kind;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        bump();
      }
      current_.kind = Tok::kIdent;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) bump();
      current_.kind = Tok::kNumber;
    } else if (c == '\'') {
      single(Tok::kPrime);
    } else if (c == '(') {
      single(Tok::kLParen);
    } else if (c == ')') {
      single(Tok::kRParen);
    } else if (c == '!') {
      single(Tok::kNot);
    } else if (c == '&') {
      single(Tok::kAnd);
    } else if (c == '|') {
      single(Tok::kOr);
    } else if (c == ',') {
      single(Tok::kComma);
    } else if (c == ';') {
      single(Tok::kSemicolon);
    } else if (c == ':') {
      single(Tok::kColon);
    } else if (text_.substr(pos_, 2) == "->") {
      bump();
      single(Tok::kImplies);
    } else if (text_.substr(pos_, 3) == "<->") {
      bump();
      bump();
      single(Tok::kIff);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
    }
    current_.text = text_.substr(start, pos_ - start);
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t column_;
  Token current_{Tok::kEnd, {}, 1, 1};
};

bool is_reserved(std::string_view word) {
  static const std::set<std::string_view> kReserved = {
      "true", "false", "K", "skip", "if", "then", "else", "endif", "while", "do", "endwhile"};
  return kReserved.contains(word);
}

class FormulaParser {
 public:
  // vars is mutable only when syntax.declare is set.
  FormulaParser(Lexer& lex, VariableTable* mutable_vars, const VariableTable& vars,
                ObjectiveSyntax syntax, bool epistemic)
      : lex_(lex), mutable_vars_(mutable_vars), vars_(vars), syntax_(syntax), epistemic_(epistemic) {}

  Formula parse() { return iff(); }

 private:
  Formula iff() {
    Formula f = implies();
    while (lex_.at(Tok::kIff)) {
      lex_.next();
      f = Formula::equivalence(f, implies());
    }
    return f;
  }

  Formula implies() {
    Formula f = disjunction();
    if (lex_.at(Tok::kImplies)) {
      lex_.next();
      return Formula::implication(f, implies());
    }
    return f;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (lex_.at(Tok::kOr)) {
      lex_.next();
      f = Formula::disjunction(f, conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (lex_.at(Tok::kAnd)) {
      lex_.next();
      f = Formula::conjunction(f, unary());
    }
    return f;
  }

  Formula unary() {
    if (lex_.at(Tok::kNot)) {
      lex_.next();
      return Formula::negation(unary());
    }
    return atom();
  }

  Formula atom() {
    if (lex_.at(Tok::kLParen)) {
      lex_.next();
      Formula f = iff();
      lex_.expect(Tok::kRParen, "')'");
      return f;
    }
    if (!lex_.at(Tok::kIdent)) lex_.fail("expected a formula");
    const Token t = lex_.peek();
    if (t.text == "true") {
      lex_.next();
      return Formula::truth();
    }
    if (t.text == "false") {
      lex_.next();
      return Formula::falsity();
    }
    if (t.text == "K") {
      if (!epistemic_ || inside_know_) lex_.fail("K is not allowed here");
      lex_.next();
      lex_.expect(Tok::kLParen, "'(' after K");
      inside_know_ = true;
      Formula body = iff();
      inside_know_ = false;
      lex_.expect(Tok::kRParen, "')'");
      return Formula::know(body);
    }
    if (t.text == "frame" && syntax_.allow_frame) {
      lex_.next();
      lex_.expect(Tok::kLParen, "'(' after frame");
      std::vector<std::size_t> framed;
      if (!lex_.at(Tok::kRParen)) {
        framed.push_back(variable(lex_.expect(Tok::kIdent, "a variable name")));
        while (lex_.at(Tok::kComma)) {
          lex_.next();
          framed.push_back(variable(lex_.expect(Tok::kIdent, "a variable name")));
        }
      }
      lex_.expect(Tok::kRParen, "')'");
      return frame_axioms(framed);
    }
    if (is_reserved(t.text)) lex_.fail("expected a formula");
    if (epistemic_ && !inside_know_) {
      throw ParseError("variable '" + std::string(t.text) + "' outside K (formula must be purely subjective)",
                       t.line, t.column);
    }
    lex_.next();
    const std::size_t index = variable(t);
    if (lex_.at(Tok::kPrime)) {
      if (!syntax_.allow_primed) lex_.fail("primed variables are only allowed in ontic theories");
      lex_.next();
      return Formula::primed(index);
    }
    return Formula::var(index);
  }

  std::size_t variable(const Token& t) {
    if (auto i = vars_.find(t.text)) return *i;
    if (syntax_.declare && mutable_vars_ != nullptr && !is_reserved(t.text)) {
      try {
        return mutable_vars_->declare(std::string(t.text));
      } catch (const Error& e) {
        throw ParseError(e.what(), t.line, t.column);
      }
    }
    throw ParseError("undeclared variable '" + std::string(t.text) + "'", t.line, t.column);
  }

  Lexer& lex_;
  VariableTable* mutable_vars_;
  const VariableTable& vars_;
  ObjectiveSyntax syntax_;
  bool epistemic_;
  bool inside_know_ = false;
};

Formula objective_in(Lexer& lex, VariableTable* mutable_vars, const VariableTable& vars,
                     ObjectiveSyntax syntax) {
  return FormulaParser(lex, mutable_vars, vars, syntax, false).parse();
}

Formula epistemic_in(Lexer& lex, const VariableTable& vars) {
  return FormulaParser(lex, nullptr, vars, {}, true).parse();
}

void expect_end(Lexer& lex) {
  if (!lex.at(Tok::kEnd)) lex.fail("unexpected trailing input");
}

class KbpParser {
 public:
  KbpParser(Lexer& lex, const VariableTable& vars) : lex_(lex), vars_(vars) {}

  Kbp block() {
    std::vector<Kbp> parts;
    while (!at_block_end()) {
      Kbp s = statement();
      if (!s.is_empty()) parts.push_back(s);
      if (!lex_.at(Tok::kSemicolon)) break;
      lex_.next();
    }
    return sequence(parts);
  }

 private:
  bool at_block_end() const {
    return lex_.at(Tok::kEnd) || lex_.at_word("else") || lex_.at_word("endif") ||
           lex_.at_word("endwhile");
  }

  Formula condition() { return to_sknnf(epistemic_in(lex_, vars_)); }

  Kbp statement() {
    if (!lex_.at(Tok::kIdent)) lex_.fail("expected a statement");
    if (lex_.at_word("skip")) {
      lex_.next();
      return Kbp::empty();
    }
    if (lex_.at_word("if")) {
      lex_.next();
      Formula c = condition();
      lex_.expect_word("then");
      Kbp then_branch = block();
      Kbp else_branch;
      if (lex_.at_word("else")) {
        lex_.next();
        else_branch = block();
      }
      lex_.expect_word("endif");
      return Kbp::branch(c, then_branch, else_branch);
    }
    if (lex_.at_word("while")) {
      lex_.next();
      Formula c = condition();
      lex_.expect_word("do");
      Kbp body = block();
      lex_.expect_word("endwhile");
      return Kbp::loop(c, body);
    }
    if (is_reserved(lex_.peek().text)) lex_.fail("expected a statement");
    return Kbp::act(std::string(lex_.next().text));
  }

  Lexer& lex_;
  const VariableTable& vars_;
};

// Splits off "keyword" and returns the text after the first ':' (if any).
struct Line {
  std::string_view text;
  std::size_t number;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 1;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({line, number++});
    if (eol == std::string_view::npos) break;
    text.remove_prefix(eol + 1);
  }
  return lines;
}

std::string_view strip_comment(std::string_view line) {
  const std::size_t hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

// Column of the first character of `part` inside `line` (1-based).
std::size_t column_of(std::string_view line, std::string_view part) {
  return static_cast<std::size_t>(part.data() - line.data()) + 1;
}

std::string feedback_list(const EpistemicAction& a, const VariableTable& vars) {
  std::string out;
  for (std::size_t i = 0; i < a.feedbacks.size(); ++i) {
    if (i) out += " ; ";
    out += to_string(a.feedbacks[i], vars);
  }
  return out;
}

}  // namespace

Formula parse_objective(std::string_view text, VariableTable& vars, ObjectiveSyntax syntax) {
  Lexer lex(text);
  Formula f = objective_in(lex, &vars, vars, syntax);
  expect_end(lex);
  return f;
}

Formula parse_objective(std::string_view text, const VariableTable& vars) {
  Lexer lex(text);
  Formula f = objective_in(lex, nullptr, vars, {});
  expect_end(lex);
  return f;
}

Formula parse_epistemic(std::string_view text, const VariableTable& vars) {
  Lexer lex(text);
  Formula f = epistemic_in(lex, vars);
  expect_end(lex);
  return f;
}

Kbp parse_kbp(std::string_view text, const VariableTable& vars) {
  Lexer lex(text);
  Kbp pi = KbpParser(lex, vars).block();
  expect_end(lex);
  return pi;
}

PlanningProblem parse_problem(std::string_view text) {
  PlanningProblem p;
  bool seen_init = false;
  bool seen_goal = false;
  bool in_header = true;
  std::set<std::string> names;

  for (const Line& raw : split_lines(text)) {
    const std::string_view full = raw.text;
    if (in_header) {
      const std::string_view t = trim(full);
      if (!t.empty() && t.front() == '#') {
        std::string_view note = t.substr(1);
        if (!note.empty() && note.front() == ' ') note.remove_prefix(1);
        p.notes.emplace_back(note);
        continue;
      }
      if (!t.empty()) in_header = false;
    }
    const std::string_view line = trim(strip_comment(full));
    if (line.empty()) continue;

    const std::size_t colon = line.find(':');
    std::string_view head = trim(line.substr(0, colon));
    std::string_view body = colon == std::string_view::npos ? std::string_view{} : line.substr(colon + 1);
    const std::size_t body_col = colon == std::string_view::npos ? 1 : column_of(full, body);
    auto body_lexer = [&] { return Lexer(body, raw.number, body_col); };

    auto fail = [&](const std::string& msg, std::string_view at) -> void {
      throw ParseError(msg, raw.number, column_of(full, at));
    };

    if (head.starts_with("var") && (head.size() == 3 || std::isspace(static_cast<unsigned char>(head[3])))) {
      if (colon != std::string_view::npos) fail("'var' takes no ':'", line);
      Lexer lex(line.substr(3), raw.number, column_of(full, line) + 3);
      while (!lex.at(Tok::kEnd)) {
        const Token t = lex.expect(Tok::kIdent, "a variable name");
        if (is_reserved(t.text) || t.text == "frame") {
          throw ParseError("reserved word used as a variable name", t.line, t.column);
        }
        if (p.variables.contains(t.text)) {
          throw ParseError("variable '" + std::string(t.text) + "' declared twice", t.line, t.column);
        }
        try {
          p.variables.declare(std::string(t.text));
        } catch (const Error& e) {
          throw ParseError(e.what(), t.line, t.column);
        }
      }
      continue;
    }
    if (colon == std::string_view::npos) fail("expected 'keyword:'", line);

    if (head == "init") {
      if (seen_init) fail("duplicate init", line);
      Lexer lex = body_lexer();
      p.init = objective_in(lex, nullptr, p.variables, {});
      expect_end(lex);
      seen_init = true;
    } else if (head == "goal") {
      if (seen_goal) fail("duplicate goal", line);
      Lexer lex = body_lexer();
      p.goal = to_sknnf(epistemic_in(lex, p.variables));
      expect_end(lex);
      seen_goal = true;
    } else if (head == "bound") {
      Lexer lex = body_lexer();
      const Token t = lex.expect(Tok::kNumber, "a nonnegative integer");
      std::size_t k = 0;
      std::from_chars(t.text.data(), t.text.data() + t.text.size(), k);
      expect_end(lex);
      p.bound = k;
    } else if (head == "order") {
      Lexer lex = body_lexer();
      while (!lex.at(Tok::kEnd)) p.order.emplace_back(lex.expect(Tok::kIdent, "an action name").text);
    } else if (head == "vocab") {
      Lexer lex = body_lexer();
      p.vocabulary.push_back(to_sknnf(epistemic_in(lex, p.variables)));
      expect_end(lex);
    } else if (head.starts_with("ontic") || head.starts_with("epistemic")) {
      const bool ontic = head.starts_with("ontic");
      Lexer hl(head, raw.number, column_of(full, head));
      hl.next();
      const Token name = hl.expect(Tok::kIdent, "an action name");
      expect_end(hl);
      if (is_reserved(name.text)) throw ParseError("reserved word used as an action name", name.line, name.column);
      if (!names.insert(std::string(name.text)).second) {
        throw ParseError("action '" + std::string(name.text) + "' declared twice", name.line, name.column);
      }
      Lexer lex = body_lexer();
      if (ontic) {
        ObjectiveSyntax syntax;
        syntax.allow_primed = true;
        syntax.allow_frame = true;
        Formula theory = objective_in(lex, nullptr, p.variables, syntax);
        expect_end(lex);
        p.ontic.push_back({std::string(name.text), theory});
      } else {
        EpistemicAction a{std::string(name.text), {}};
        a.feedbacks.push_back(objective_in(lex, nullptr, p.variables, {}));
        while (lex.at(Tok::kSemicolon)) {
          lex.next();
          a.feedbacks.push_back(objective_in(lex, nullptr, p.variables, {}));
        }
        expect_end(lex);
        p.epistemic.push_back(std::move(a));
      }
    } else {
      fail("unknown section '" + std::string(head) + "'", head);
    }
  }
  if (!seen_init) throw ParseError("missing 'init:' line", 1, 1);
  if (!seen_goal) throw ParseError("missing 'goal:' line", 1, 1);
  return p;
}

std::string print_problem(const PlanningProblem& p) {
  std::string out;
  for (const auto& note : p.notes) out += note.empty() ? "#\n" : "# " + note + "\n";
  out += "var";
  for (const auto& name : p.variables.names()) out += " " + name;
  out += "\n";
  out += "init: " + to_string(p.init, p.variables) + "\n";
  for (const auto& a : p.ontic) out += "ontic " + a.name + ": " + to_string(a.theory, p.variables) + "\n";
  for (const auto& a : p.epistemic) out += "epistemic " + a.name + ": " + feedback_list(a, p.variables) + "\n";
  out += "goal: " + to_string(p.goal, p.variables) + "\n";
  if (p.bound) out += "bound: " + std::to_string(*p.bound) + "\n";
  if (!p.order.empty()) {
    out += "order:";
    for (const auto& n : p.order) out += " " + n;
    out += "\n";
  }
  for (const auto& v : p.vocabulary) out += "vocab: " + to_string(v, p.variables) + "\n";
  return out;
}

Qbf parse_qbf(std::string_view text) {
  Qbf psi;
  bool seen_matrix = false;
  for (const Line& raw : split_lines(text)) {
    const std::string_view line = trim(strip_comment(raw.text));
    if (line.empty()) continue;
    Lexer lex(line, raw.number, column_of(raw.text, line));
    const Token head = lex.expect(Tok::kIdent, "'exists', 'forall' or 'matrix'");
    if (seen_matrix) throw ParseError("input after matrix", head.line, head.column);
    if (head.text == "exists" || head.text == "forall") {
      QuantifierBlock block{head.text == "exists", {}};
      while (!lex.at(Tok::kEnd)) {
        const Token t = lex.expect(Tok::kIdent, "a variable name");
        if (is_reserved(t.text)) throw ParseError("reserved word used as a variable name", t.line, t.column);
        if (psi.variables.contains(t.text)) {
          throw ParseError("variable '" + std::string(t.text) + "' quantified twice", t.line, t.column);
        }
        block.vars.push_back(psi.variables.declare(std::string(t.text)));
      }
      psi.prefix.push_back(std::move(block));
    } else if (head.text == "matrix") {
      lex.expect(Tok::kColon, "':'");
      psi.matrix = objective_in(lex, nullptr, psi.variables, {});
      expect_end(lex);
      seen_matrix = true;
    } else {
      throw ParseError("expected 'exists', 'forall' or 'matrix'", head.line, head.column);
    }
  }
  if (!seen_matrix) throw ParseError("missing 'matrix:' line", 1, 1);
  return psi;
}

std::string print_qbf(const Qbf& psi) {
  std::string out;
  for (const auto& block : psi.prefix) {
    out += block.existential ? "exists" : "forall";
    for (std::size_t v : block.vars) out += " " + psi.variables.name(v);
    out += "\n";
  }
  out += "matrix: " + to_string(psi.matrix, psi.variables) + "\n";
  return out;
}

std::vector<Formula> parse_vocabulary(std::string_view text, const VariableTable& vars) {
  std::vector<Formula> out;
  for (const Line& raw : split_lines(text)) {
    const std::string_view line = trim(strip_comment(raw.text));
    if (line.empty()) continue;
    Lexer lex(line, raw.number, column_of(raw.text, line));
    out.push_back(to_sknnf(epistemic_in(lex, vars)));
    expect_end(lex);
  }
  return out;
}

}  // namespace kbp
