#pragma once

#include <iosfwd>

namespace denoise_bench {

inline constexpr int exit_success = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// Entry point of the `denoise-bench` tool: corrupt, validate, run and report
/// subcommands. Returns 0 on success, 1 on runtime failure, 2 on usage error.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// Applies DENOISE_BENCH_LOG (trace, debug, info, warn, error, off). Default: warn.
void configure_logging();

}  // namespace denoise_bench
