#pragma once

#include <ostream>

namespace pasa {

/// Entry point of the `pasa` command line tool (run, schedule, verify, bench).
/// Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pasa
