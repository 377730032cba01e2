#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fieldlink::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name. Usage errors print
/// the help text on `err` and return kExitUsage; module errors print
/// "error: <Code>: <message>" on `err` and return kExitDomainError.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fieldlink::tools
