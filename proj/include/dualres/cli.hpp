#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dualres {

/// Entry point of the `dualres` tool. Returns the process exit code:
/// 0 success, 2 configuration error, 3 physics-domain error, 4 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualres
