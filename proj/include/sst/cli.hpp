// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace sst {

// Command-line entry point.  Subcommands: simulate, eval, bench, masks,
// gradcheck, equiv, loss.  Returns the process exit code; usage problems and
// failed checks are nonzero.
int run_cli(int argc, const char* const* argv);

}  // namespace sst
