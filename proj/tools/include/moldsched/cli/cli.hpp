#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace moldsched::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the layout file when --layout is absent.
inline constexpr const char* kLayoutEnv = "MOLDSCHED_LAYOUT";

/// Runs the harness with `args` (without the program name). Summary rows go
/// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace moldsched::cli
