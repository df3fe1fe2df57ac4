#include <sstream>

#include "kbpkit/compiler.hpp"
#include "kbpkit/error.hpp"
#include "kbpkit/reductions.hpp"

namespace kbp {

std::vector<SuccinctnessRow> measure_succinctness(std::string_view family, std::size_t max_n,
                                                  const CompileLimits& limits) {
  if (family != "test-chain" && family != "3sat-family")
    throw ContractViolation("unknown family: " + std::string(family));
  std::vector<SuccinctnessRow> rows;
  for (std::size_t n = 0; n <= max_n; ++n) {
    if (n == 0) {
      rows.push_back(SuccinctnessRow{});
      continue;
    }
    if (family == "test-chain") {
      auto [problem, pi] = test_chain(n);
      rows.push_back(measure_row(n, problem, link(pi, problem), limits));
    } else {
      ReductionOutput out = gen_3sat_family(n, 1);
      rows.push_back(measure_row(n, out.problem, link(*out.plan, out.problem), limits));
    }
  }
  return rows;
}

std::string succinctness_csv(const std::vector<SuccinctnessRow>& rows) {
  std::ostringstream out;
  out << "n,kbp_size,policy_size,lower_bound\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.kbp_size << ',' << r.policy_size << ','
        << (r.lower_bound ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace kbp
