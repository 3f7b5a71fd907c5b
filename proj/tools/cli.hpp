#pragma once

namespace evid::cli {

/// Parses argv and runs one subcommand. Exit codes: 0 success,
/// 1 runtime or domain error, 2 usage error.
int run(int argc, const char* const* argv);

}  // namespace evid::cli
