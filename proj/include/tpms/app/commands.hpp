#pragma once

#include "tpms/app/config.hpp"

#include <ostream>

namespace tpms::app {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

int cmd_matrices(const RunConfig& cfg, std::ostream& out);
int cmd_fit(const RunConfig& cfg, std::ostream& out);
int cmd_derivatives(const RunConfig& cfg, std::ostream& out);
int cmd_sample(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);

/// Full command-line entry point: parses argv, runs one subcommand and maps
/// errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tpms::app
