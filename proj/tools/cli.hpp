#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latticegap::cli {

/// Exit codes of the command-line front end.
enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,   ///< bad flags or a malformed config
  kDomain = 3,  ///< precondition violated (omega in a band, bad parameter)
  kNumeric = 4, ///< a quadrature or iteration did not converge
  kIo = 5,
};

/// Runs one subcommand. Results go to `out` (or to --out); failures print a
/// one-line JSON object {"error": {...}} to `err` and return nonzero.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latticegap::cli
