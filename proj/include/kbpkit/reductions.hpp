#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbpkit/kbp.hpp"
#include "kbpkit/problem.hpp"
#include "kbpkit/qbf.hpp"

namespace kbp {

// A generated planning problem. Bound, order and vocabulary travel inside the
// problem; `certificate` is also recorded as a "certificate: ..." note.
struct ReductionOutput {
  PlanningProblem problem;
  std::optional<Kbp> plan;  // a valid plan when the construction provides one
  std::string certificate;
  bool vocabulary_sufficient = false;
};

// Variables of each prefix block for the block pattern (e.g. "AE"). Missing
// blocks are empty; extra blocks are a ValidationError.
std::vector<std::vector<std::size_t>> match_prefix(const Qbf& psi, std::string_view pattern);

// forall a exists b phi -> epistemic-only problem with test(a_i) actions.
ReductionOutput reduce_qbf2_epistemic(const Qbf& psi);

// No actions, I = K(true), G = K(!phi): solvable iff phi is unsatisfiable.
ReductionOutput reduce_unsat_positive(const Formula& phi, const VariableTable& vars);

// Strictly alternating exists a1 forall b1 ... (padded with dummies) ->
// ordered epistemic problem over x_i, y_i.
ReductionOutput reduce_qbf_wfoe(const Qbf& psi);

enum class MutexReading : std::uint8_t {
  kExclusive,  // (!K mu_a & !K !mu_a) | (!K mu_b & !K !mu_b)
  kAsPrinted,  // (!K mu_a & !K mu_b) | (!K mu_a & !K mu_b)
};

// Ordered epistemic problem -> unordered one forcing the order.
ReductionOutput reduce_wfoe_wfe(const PlanningProblem& ordered, MutexReading mutex = MutexReading::kExclusive);

// exists a forall b exists c phi -> bounded while-free problem with ontic
// setters, test(a_i <-> b_i) and a sufficient vocabulary {K(phi -> c_j)}.
ReductionOutput reduce_qbf3_bounded(const Qbf& psi);

// exists a forall b phi -> epistemic-only problem with positive goal and k = n.
ReductionOutput reduce_qbf2_bounded_pos(const Qbf& psi);

// Hidden x1..xn, clause encodings l<i>_<j>_<k>, and s with s -> every clause.
// The plan reads every bit, then either stops on K(!s) or builds a model.
ReductionOutput gen_3sat_family(std::size_t nvars, std::size_t nclauses);

// Literal encoded by slot value v: x_{v+1} for v < n, !x_{v-n+1} for v < 2n,
// true otherwise.
Formula encoded_literal(std::size_t value, std::size_t nvars);
std::size_t literal_bits(std::size_t nvars);

struct GadgetInfo {
  std::size_t branch_points = 0;
  std::size_t forbidden_flags = 0;  // branch points keeping their f variable
  std::vector<std::string> dropped_flags;
};

// Problem whose valid plans are, up to void actions and gadget variables,
// equivalent to pi run from base.init. Uses base's actions and its goal as
// the base goal. Throws ValidationError if pi does not terminate or uses a
// while condition that is not K(phi) or !K(phi).
ReductionOutput problem_from_kbp(const PlanningProblem& base, const Kbp& pi, GadgetInfo* info = nullptr);

}  // namespace kbp
