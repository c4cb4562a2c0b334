#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace arveson {

namespace exit_code {
inline constexpr int kSuccess = 0;       // similar / positive result
inline constexpr int kNegative = 1;      // not_similar / negative result
inline constexpr int kInconclusive = 2;
inline constexpr int kUsage = 64;
inline constexpr int kData = 65;         // parse or schema error in an input file
inline constexpr int kSoftware = 70;     // numerical failure
}  // namespace exit_code

/// Runs one CLI invocation. `args` excludes the program name. Reports go to
/// `out` (written once, at the end); diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arveson
