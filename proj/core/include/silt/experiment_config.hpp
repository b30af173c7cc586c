#pragma once

// Experiment configuration: a JSON document with strict validation, lossless
// round-trip and a content hash that names the run directory.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "silt/fwt_regularization.hpp"
#include "silt/operator_catalog.hpp"

namespace silt {

struct ExperimentConfig {
  OperatorSpec op;
  int grid_n = 32;
  int k = 3;
  double delta = 0.1;
  std::vector<double> eps_ladder;
  std::vector<ProbeSpec> probes;
  std::uint64_t seed = 0;
  std::size_t paths = 10000;
  std::string output_dir = "runs";
  // Grid sizes for refinement studies (inverse-Gram integral, regularized quadratures).
  std::vector<int> levels;
  bool expensive = false;
  // FWT modes by name: thm1_full_simplex, thm2_k2, eq3_delta (uses delta).
  std::vector<std::string> modes;
};

// Generalized bridge projecting out {1_[0,1/2], sin(pi t)}, k = 3, delta = 0.1.
ExperimentConfig default_config();

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const OperatorSpec& spec);
nlohmann::json to_json(const FunctionSpec& spec);

// Throws ConfigError naming the offending field. Missing keys take their
// default_config() values; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
// Throws ConfigError with line:column for syntax errors.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

OperatorSpec operator_from_json(const nlohmann::json& j, const std::string& where = "operator");
FunctionSpec function_from_json(const nlohmann::json& j, const std::string& where);

// Cross-field checks (delta >= 2/n, (k-1) delta < 1, ladder shape, ...).
void validate(const ExperimentConfig& config);

// FNV-1a 64 over the canonical JSON without output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

FwtMode parse_mode(const std::string& name, double delta);

}  // namespace silt
