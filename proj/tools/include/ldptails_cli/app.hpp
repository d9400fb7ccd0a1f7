#pragma once

// The `ldptails` command line: validate-weights, rate, simulate, selftest.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 a validated check
// failed (assumption rejected, self-test residual above tolerance, numeric
// routine out of its trusted range).

#include <ostream>
#include <string>
#include <vector>

namespace ldptails::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;

/// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ldptails::cli
