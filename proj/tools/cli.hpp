#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sofa::cli {

/// Exit status for a completed command whose --audit found a problem.
inline constexpr int kAuditFailed = 2;

/// Runs one command line (args[0] is the program name). Results and reports
/// go to `out`, diagnostics to `err`. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count used when --workers is absent: SOFA_WORKERS if set to a
/// positive integer, otherwise the hardware concurrency.
std::size_t default_workers();

/// "4..256" expands to the powers of two from 4 to 256; otherwise a comma list.
std::vector<std::size_t> parse_alphabets(const std::string& text);

}  // namespace sofa::cli
