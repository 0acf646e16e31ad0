#pragma once

#include <iosfwd>

namespace silpose::cli {

/// Stable exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kInternalError = 1,
    kUsageError = 2,
};

/// Entry point behind the `silpose` executable. Subcommands:
/// learn-background, synth, track, bench.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace silpose::cli
