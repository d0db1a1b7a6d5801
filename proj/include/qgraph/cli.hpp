#pragma once

namespace qgraph {

/// Entry point of the command-line tool; returns the process exit code.
///
/// Verbs:
///   run <scenario> -o <dir> [--jobs N] [--seed S]
///   list-builtins [--machine]
///
/// Exit codes: 0 success, 2 configuration error, 3 completeness
/// certificate failure, 4 verdict failure, 1 unexpected error.
int cli_main(int argc, const char* const* argv);

}  // namespace qgraph
