#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abperc {

/// Entry point of the command-line tool. `args` excludes the program name.
/// Subcommands: sample, percolate, mu-c, bound, lln, mindeg, couple-test.
/// Writes `<out>.csv` and `<out>.summary.json`; returns 0 on success, 1 on
/// parameter or estimation errors and 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abperc
