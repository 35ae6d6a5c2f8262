#pragma once

// Command-line front end: one subcommand per scenario, flat key=value
// configuration, CSV/JSON artifacts named <scenario>-<hash>.

#include <iosfwd>
#include <string>
#include <vector>

namespace eulerspec::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kComputation = 1;
inline constexpr int kValidation = 2;
inline constexpr int kIncomplete = 3;  // report: missing or corrupted artifacts

/// Parses and runs; progress goes to out, one JSON error record to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "key=value" lines ('#' comments, blank lines ignored) as "--key=value".
std::vector<std::string> config_arguments(std::istream& is);

std::string sha256_hex(const std::string& bytes);

}  // namespace eulerspec::cli
