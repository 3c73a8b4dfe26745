#pragma once

#include <iosfwd>

namespace rstar::cli {

/// Runs one command line.  Data goes to `out`, diagnostics to `err`.
/// Returns 0 on success, 2 on usage errors and 3 on solver errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rstar::cli
