#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rirkit::cli {

/// Runs one command. `args` excludes the program name. The JSON report (or
/// error object) goes to `out`, diagnostics to `err`.
/// Exit codes: 0 ok, 2 invalid input, 3 precondition, 4 verification/numerical.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rirkit::cli
