#pragma once

#include <iosfwd>
#include <string>
#include <vector>

/// Command-line front end: subcommands bessel, fit, trace, detz, eigs, weyl, compare.
namespace cuspdet::cli {

enum ExitCode : int {
  ok = 0,
  usage = 1,      ///< bad flags, unknown settings, unreadable files, arguments outside the domain
  schema = 2,     ///< spec document malformed or violating an operator invariant
  numerical = 3,  ///< a computation failed its accuracy target or guard
  checks_failed = 4,  ///< `compare` ran but some rows failed
};

/// `args` excludes the program name. Results go to `out` unless --out names a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace cuspdet::cli
