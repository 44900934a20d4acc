#pragma once

#include <iosfwd>

namespace skytrack::cli {

/// Exit codes: 0 ok, 1 runtime failure, 2 usage, 3 invalid configuration.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skytrack::cli
