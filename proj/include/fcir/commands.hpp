#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fcir/config.hpp"

namespace fcir {

enum ExitCode : int {
  exit_ok = 0,
  exit_assertion_failed = 1,
  exit_config_error = 2,
  exit_not_converged = 3,
  exit_ordering_violation = 4,
  exit_stability_abort = 5,
  exit_internal_error = 6,
};

struct CommandResult {
  int exit_code = exit_ok;
  std::string summary;  // key=value lines, also written to <command>_summary.txt
  std::vector<std::filesystem::path> files;
};

enum class VerifyStudy { moments, transform, coincide, cir_residual, piecewise };

VerifyStudy parse_study(const std::string& name);
std::string to_string(VerifyStudy study);

CommandResult cmd_fbm_selftest(const ExperimentConfig& config);
CommandResult cmd_simulate(const ExperimentConfig& config);
CommandResult cmd_ladder(const ExperimentConfig& config);
CommandResult cmd_intervals(const ExperimentConfig& config);
CommandResult cmd_verify(const ExperimentConfig& config, VerifyStudy study);

/// Dispatch by command name, mapping library exceptions to exit codes.
/// `study` is only used by "verify".
CommandResult run_command(const std::string& command, const std::string& study,
                          const ExperimentConfig& config);

}  // namespace fcir
