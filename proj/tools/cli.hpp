#pragma once

#include <iosfwd>

namespace srrw {

/// Exit codes: 0 success, 1 a check failed or a run aborted, 2 usage or
/// config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srrw
