#pragma once

#include "cvtomo/experiment.hpp"
#include "cvtomo/run_config.hpp"

#include <json.hpp>

// Internal JSON plumbing shared by the file formats and the CLI drivers.
// Vendored nlohmann::json stays out of the installed headers on purpose.

namespace cvtomo {

nlohmann::json experiment_params_to_json(const ExperimentParams& p);
ExperimentParams experiment_params_from_json(const nlohmann::json& j);

// Full provenance dump (all sections plus derived efficiency products),
// embedded verbatim in every JSON artifact the pipeline writes.
nlohmann::json run_config_to_json(const RunConfig& config);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace cvtomo
