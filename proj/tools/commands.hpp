#pragma once

#include <ostream>

#include "pipeline_config.hpp"

namespace gpkmd::cli {

/// Exit codes of the gpkmd tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // computational failure
inline constexpr int kExitConfig = 2;   // configuration or IO error

/// Each command writes its files under cfg.out plus effective_config.json and
/// prints a short summary to `out`. Errors propagate as gpkmd exceptions.
void cmd_simulate(const PipelineConfig& cfg, std::ostream& out);
void cmd_decompose(const PipelineConfig& cfg, std::ostream& out);
void cmd_select_hyper(const PipelineConfig& cfg, std::ostream& out);
void cmd_assess(const PipelineConfig& cfg, std::ostream& out);

/// Parses argv, runs the chosen subcommand and maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gpkmd::cli
