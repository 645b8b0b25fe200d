#pragma once

// Command-line surface. run_cli is the whole program (main() is a one-liner)
// so tests can drive every subcommand in-process.
//
// Exit codes: 0 success, 1 usage/validation/input errors, 2 backend failures.

#include <string>
#include <vector>

namespace oneshot {

constexpr const char* kToolName = "oneshotlp";
constexpr const char* kToolVersion = "1.0.0";

int run_cli(int argc, const char* const* argv);

// Convenience overload for tests.
int run_cli(const std::vector<std::string>& args);

}  // namespace oneshot
