#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edgeflow::cli {

/// Runs one `edgeflow` invocation. `args` excludes the program name. Returns
/// the process exit code; failures print a single diagnostic line to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace edgeflow::cli
