#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zeqr::cli {

// Exit codes: 0 success, 1 failure of the work itself, 2 usage or format error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the `zeqr` binary. `args` excludes the program name.
// `in` feeds the REPL.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace zeqr::cli
