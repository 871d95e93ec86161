#pragma once

namespace qrna {

// Parses arguments and dispatches to the subcommands; returns the process
// exit code (0 on success, nonzero on any module error).
int run_cli(int argc, char** argv);

}  // namespace qrna
