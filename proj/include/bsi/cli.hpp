#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bsi::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kNoAcceptingTopology = 3,
  kMalformedInput = 4,
};

/// Runs the command line `args` (args[0] is the program name) and returns
/// the exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands "2^a..2^b", "2^i", plain integers, and comma-separated lists of
/// those. Throws InputError on anything else.
std::vector<std::size_t> parse_lengths(const std::string& spec);

/// "A..B" or "N" into an inclusive state range. Throws InputError.
std::pair<int, int> parse_state_range(const std::string& spec);

}  // namespace bsi::cli
