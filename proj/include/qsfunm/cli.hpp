#pragma once

#include <iosfwd>

namespace qsfunm {

/// Entry point of the qsfunm tool. Returns 0 on success, 1 on a
/// computational error and 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsfunm
