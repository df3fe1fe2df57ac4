#include "kbpkit/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "kbpkit/compiler.hpp"
#include "kbpkit/error.hpp"
#include "kbpkit/logic.hpp"
#include "kbpkit/parser.hpp"
#include "kbpkit/planner.hpp"
#include "kbpkit/reductions.hpp"
#include "kbpkit/semantics.hpp"

namespace kbp {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

PlanningProblem load_problem(const std::string& path) {
  PlanningProblem p = parse_problem(read_file(path));
  validate_problem(p);
  return p;
}

Kbp load_plan(const std::string& path, const PlanningProblem& problem) {
  return link(parse_kbp(read_file(path), problem.variables), problem);
}

std::string plan_text(const Kbp& pi, const VariableTable& vars) {
  std::string text = to_string(pi, vars);
  if (!text.empty() && text.back() != '\n') text += '\n';
  return text;
}

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Options {
  std::string problem, plan, input, mode = "auto", vocab, out_prefix, plan_out, family = "test-chain";
  std::optional<std::size_t> bound;
  bool vocab_sufficient = false, stats = false;
  std::size_t vars = 1, clauses = 1, max_n = 6, budget = 1 << 22;
};

int cmd_check(const Options& o, std::ostream& out) {
  PlanningProblem p = load_problem(o.problem);
  out << "verdict: ok\n";
  out << "stat: variables=" << p.nvars() << " ontic=" << p.ontic.size() << " epistemic=" << p.epistemic.size()
      << " initial_states=" << p.initial_state().size() << '\n';
  return exit_code::kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  PlanningProblem p = load_problem(o.problem);
  Kbp pi = load_plan(o.plan, p);
  Stopwatch clock;
  Verdict v = verify_plan(p, pi);
  out << "verdict: " << to_string(v.kind) << '\n';
  out << "stat: configurations=" << v.configurations << '\n';
  out << "stat: wall_ms=" << clock.ms() << '\n';
  if (v.trace) {
    out << (v.kind == Verdict::Kind::kInvalid ? "counterexample:\n" : "repeating prefix:\n");
    out << to_string(*v.trace, p);
  }
  return v.valid() ? exit_code::kOk : exit_code::kNegative;
}

int cmd_compile(const Options& o, std::ostream& out) {
  PlanningProblem p = load_problem(o.problem);
  Kbp pi = load_plan(o.plan, p);
  CompileLimits limits;
  limits.max_nodes = o.budget;
  CompileResult r = compile_policy(pi, p, limits);
  if (!r.ok()) {
    out << "verdict: nonterminating\n";
    return exit_code::kNegative;
  }
  if (!r.policy.is_empty()) out << plan_text(r.policy, p.variables);
  if (o.stats) {
    out << "stat: action_occurrences,kbp_size,policy_size\n";
    out << "stat: " << action_occurrences(pi) << ',' << kbp_size(pi) << ',' << kbp_size(r.policy) << '\n';
  }
  return exit_code::kOk;
}

std::string auto_mode(const PlanningProblem& p, const std::optional<std::size_t>& bound) {
  if (!p.order.empty()) return "wfoe";
  if (bound) {
    if (p.epistemic.empty() || (p.ontic.empty() && is_positive(p.goal))) return "sequence";
    return "bounded";
  }
  if (p.ontic.empty()) return is_positive(p.goal) ? "positive" : "epistemic";
  return "fixpoint";
}

int cmd_solve(const Options& o, std::ostream& out) {
  PlanningProblem p = load_problem(o.problem);
  std::optional<std::size_t> bound = o.bound ? o.bound : p.bound;
  std::string mode = o.mode == "auto" ? auto_mode(p, bound) : o.mode;
  if ((mode == "bounded" || mode == "sequence") && !bound)
    throw ContractViolation("mode " + mode + " needs --bound or a bound: line");
  std::vector<Formula> vocabulary = default_vocabulary(p);
  if (!o.vocab.empty()) {
    for (const Formula& f : parse_vocabulary(read_file(o.vocab), p.variables)) vocabulary.push_back(f);
  }
  Stopwatch clock;
  ExistenceAnswer a = ExistenceAnswer::none();
  if (mode == "fixpoint") {
    a = solve_existence(p);
  } else if (mode == "epistemic") {
    a = solve_existence_epistemic(p);
  } else if (mode == "positive") {
    a = solve_epistemic_positive(p);
  } else if (mode == "sequence") {
    a = solve_bounded_sequence(p, *bound);
  } else if (mode == "bounded") {
    a = solve_bounded(p, *bound, vocabulary, o.vocab_sufficient);
  } else if (mode == "wfoe") {
    a = solve_wfoe(p, p.order);
  } else {
    throw ContractViolation("unknown mode " + mode);
  }
  if (a.exists()) {
    Verdict v = verify_plan(p, link(a.witness, p));
    if (!v.valid()) throw Error("solver witness failed verification");
    if (bound && (mode == "bounded" || mode == "sequence") && kbp_size(a.witness) > *bound)
      throw Error("solver witness exceeds the bound");
  }
  out << "verdict: " << to_string(a.kind) << '\n';
  out << "stat: mode=" << mode << '\n';
  out << "stat: explored=" << a.explored << '\n';
  out << "stat: wall_ms=" << clock.ms() << '\n';
  if (!a.reason.empty()) out << "stat: reason=" << a.reason << '\n';
  if (a.exists()) {
    std::string text = plan_text(a.witness, p.variables);
    out << "stat: plan_size=" << kbp_size(a.witness) << '\n';
    out << text;
    if (!o.plan_out.empty()) write_file(o.plan_out, text);
  }
  switch (a.kind) {
    case ExistenceAnswer::Kind::kExists: return exit_code::kOk;
    case ExistenceAnswer::Kind::kNone: return exit_code::kNegative;
    case ExistenceAnswer::Kind::kUnknown: return exit_code::kUnknown;
  }
  return exit_code::kError;
}

int emit(const ReductionOutput& r, const Options& o, std::ostream& out) {
  std::string text = print_problem(r.problem);
  if (o.out_prefix.empty()) {
    out << text;
    return exit_code::kOk;
  }
  write_file(o.out_prefix + ".problem", text);
  out << "wrote " << o.out_prefix << ".problem\n";
  if (r.plan) {
    write_file(o.out_prefix + ".plan", plan_text(*r.plan, r.problem.variables));
    out << "wrote " << o.out_prefix << ".plan\n";
  }
  return exit_code::kOk;
}

int cmd_reduce(const std::string& kind, const Options& o, std::ostream& out) {
  if (kind == "unsat") {
    VariableTable vars;
    ObjectiveSyntax syntax;
    syntax.declare = true;
    Formula phi = parse_objective(read_file(o.input), vars, syntax);
    return emit(reduce_unsat_positive(phi, vars), o, out);
  }
  if (kind == "wfoe2wfe") return emit(reduce_wfoe_wfe(load_problem(o.input)), o, out);
  if (kind == "fromkbp") {
    if (o.plan.empty()) throw ContractViolation("reduce fromkbp needs --plan");
    PlanningProblem base = load_problem(o.input);
    return emit(problem_from_kbp(base, load_plan(o.plan, base)), o, out);
  }
  if (kind == "satfamily") return emit(gen_3sat_family(o.vars, o.clauses), o, out);
  const std::map<std::string, std::function<ReductionOutput(const Qbf&)>> qbf_kinds{
      {"qbf2e", reduce_qbf2_epistemic},
      {"wfoe", reduce_qbf_wfoe},
      {"qbf3b", reduce_qbf3_bounded},
      {"qbf2bpos", reduce_qbf2_bounded_pos},
  };
  auto it = qbf_kinds.find(kind);
  if (it == qbf_kinds.end()) throw ContractViolation("unknown reduction " + kind);
  return emit(it->second(parse_qbf(read_file(o.input))), o, out);
}

int cmd_bench(const Options& o, std::ostream& out) {
  CompileLimits limits;
  limits.max_nodes = o.budget;
  out << succinctness_csv(measure_succinctness(o.family, o.max_n, limits));
  return exit_code::kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-based programs as plans", "kbpkit"};
  app.require_subcommand(1);
  Options o;
  std::function<int()> action;

  auto* check = app.add_subcommand("check", "Parse and validate a problem file");
  check->add_option("problem", o.problem)->required();
  check->callback([&] { action = [&] { return cmd_check(o, out); }; });

  auto* verify = app.add_subcommand("verify", "Check that a plan is valid for a problem");
  verify->add_option("problem", o.problem)->required();
  verify->add_option("plan", o.plan)->required();
  verify->callback([&] { action = [&] { return cmd_verify(o, out); }; });

  auto* compile = app.add_subcommand("compile", "Compile a plan into its standard policy");
  compile->add_option("problem", o.problem)->required();
  compile->add_option("plan", o.plan)->required();
  compile->add_flag("--stats", o.stats, "Append a size row");
  compile->add_option("--budget", o.budget, "Maximum policy size");
  compile->callback([&] { action = [&] { return cmd_compile(o, out); }; });

  auto* solve = app.add_subcommand("solve", "Decide plan existence");
  solve->add_option("problem", o.problem)->required();
  solve->add_option("--mode", o.mode)
      ->check(CLI::IsMember({"auto", "fixpoint", "epistemic", "positive", "sequence", "bounded", "wfoe"}));
  solve->add_option("--bound", o.bound, "Size bound k");
  solve->add_option("--vocab", o.vocab, "File of extra branching conditions");
  solve->add_flag("--vocab-sufficient", o.vocab_sufficient,
                  "Treat the vocabulary as complete, so exhausted search means none");
  solve->add_option("--plan-out", o.plan_out, "Write the witness plan here");
  solve->callback([&] { action = [&] { return cmd_solve(o, out); }; });

  std::string kind;
  auto* reduce = app.add_subcommand("reduce", "Build a planning problem from another problem");
  reduce->add_option("kind", kind)
      ->required()
      ->check(CLI::IsMember({"qbf2e", "unsat", "wfoe", "wfoe2wfe", "qbf3b", "qbf2bpos", "fromkbp"}));
  reduce->add_option("input", o.input)->required();
  reduce->add_option("--plan", o.plan, "Program file (fromkbp)");
  reduce->add_option("--out", o.out_prefix, "Write PREFIX.problem and PREFIX.plan");
  reduce->callback([&] { action = [&] { return cmd_reduce(kind, o, out); }; });

  auto* gen = app.add_subcommand("gen", "Generate a problem family instance");
  gen->add_option("kind", kind)->required()->check(CLI::IsMember({"satfamily"}));
  gen->add_option("--vars", o.vars)->check(CLI::PositiveNumber);
  gen->add_option("--clauses", o.clauses)->check(CLI::PositiveNumber);
  gen->add_option("--out", o.out_prefix, "Write PREFIX.problem and PREFIX.plan");
  gen->callback([&] { action = [&] { return cmd_reduce(kind, o, out); }; });

  auto* bench = app.add_subcommand("bench", "Measurements");
  auto* succ = bench->add_subcommand("succinctness", "Program size versus compiled policy size (CSV)");
  bench->require_subcommand(1);
  succ->add_option("--family", o.family)->check(CLI::IsMember({"test-chain", "3sat-family"}));
  succ->add_option("--max-n", o.max_n);
  succ->add_option("--budget", o.budget, "Maximum policy size before reporting a lower bound");
  succ->callback([&] { action = [&] { return cmd_bench(o, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kError;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kError;
  }
}

}  // namespace kbp
