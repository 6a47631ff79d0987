#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qdcascade::cli {

/// Runs one command line. args[0] is the program name. Never throws;
/// diagnostics go to `err`, stdout-bound output to `out`.
int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);

} // namespace qdcascade::cli
