#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kbp {

// Exit codes of the kbpkit command line.
namespace exit_code {
inline constexpr int kOk = 0;        // valid / exists / ok
inline constexpr int kNegative = 1;  // invalid, nonterminating, none
inline constexpr int kError = 2;     // usage, parse or validation error
inline constexpr int kUnknown = 3;   // solver gave up
}  // namespace exit_code

// Runs one kbpkit invocation; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kbp
