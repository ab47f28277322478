#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lscd::cli {

/// Runs one subcommand. `args` excludes the program name. Progress goes to
/// `out`; failures are reported on `err` as a one-line JSON object and a
/// nonzero code is returned (2 usage/config, 3 I/O, 4 non-finite values).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lscd::cli
