#pragma once

// JSON and CSV serialization of reports, and atomic file output.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "silt/fwt_regularization.hpp"
#include "silt/lemma_audits.hpp"
#include "silt/silt_estimators.hpp"

namespace silt {

nlohmann::json to_json(const QuadratureReport& report);
nlohmann::json to_json(const MomentTable& table);
nlohmann::json to_json(const SuiteResult& suite);
nlohmann::json to_json(const RatioBand& band);

// n,value,tuples,singular_hits,singular_weight,relative_change
std::string quadrature_levels_csv(const QuadratureReport& report);

// Round-trip decimal form of a double ("{:.17g}").
std::string format_double(double v);

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Two-space indented JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace silt
