#pragma once

#include <iosfwd>

namespace nsplan {

/// Command-line entry point. Subcommands: run, table1, ablation, timing,
/// envs, oracle. Returns 0 on success, 1 on runtime failure, 2 on usage or
/// configuration errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nsplan
