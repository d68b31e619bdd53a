#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tableq::cli {

// Runs one subcommand. Exit status 0 on success, 1 on input errors, 2 on
// usage errors. Diagnostics go to err as file:line:col: error: message.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace tableq::cli
