#ifndef CYCLEVC_TOOLS_CLI_HPP
#define CYCLEVC_TOOLS_CLI_HPP

#include <iosfwd>

namespace cyclevc::cli {

// Exit codes: 0 success, 1 input/config/usage error, 2 internal error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cyclevc::cli

#endif
