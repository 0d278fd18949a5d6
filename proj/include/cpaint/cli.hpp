#pragma once

#include <iosfwd>

namespace cpaint {

/// Runs the `cpaint` command line. Returns the process exit status; errors
/// are reported on `err` and never escape as exceptions.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpaint
