#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace icanclean::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;     // bad arguments or configuration
inline constexpr int kExitParse = 3;     // unreadable or malformed input files, I/O failures
inline constexpr int kExitNumeric = 4;   // numerical or precondition failures

/// Runs the command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icanclean::cli
