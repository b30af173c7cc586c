#pragma once

// Experiment runners behind the CLI subcommands. Each writes its reports into
// <out>/<config hash>/ and returns the exit code the CLI should use.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "silt/experiment_config.hpp"
#include "silt/parallel.hpp"

namespace silt {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitSuiteFailure = 2,
  kExitInternalError = 3,
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides config.output_dir
  std::optional<std::uint64_t> seed_override;
  Exec exec{};
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path run_dir;
  std::vector<std::string> files;  // names relative to run_dir
  nlohmann::json report;           // the main JSON report
  std::vector<std::string> failures;
};

RunResult run_verify(ExperimentConfig config, const RunOptions& opts = {});
RunResult run_convergence(ExperimentConfig config, const RunOptions& opts = {});
RunResult run_fwt(ExperimentConfig config, const RunOptions& opts = {});
RunResult run_sample(ExperimentConfig config, const RunOptions& opts = {});

// Metadata block embedded in every JSON report.
nlohmann::json run_metadata(const ExperimentConfig& config, const std::string& command);

}  // namespace silt
