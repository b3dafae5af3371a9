#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "instobj/experiments.hpp"

namespace instobj {

/// JSON document for a pipeline: object geometry, shell mechanics, sweep,
/// coverage, sensor model, labels, network, split, scale, seed and jobs.
std::string pipeline_config_to_json(const PipelineConfig& cfg);

/// Fields present in `text` override `base`; absent ones keep its values.
/// Throws ConfigError on malformed JSON, unknown keys, wrong types or a
/// geometry that fails validation.
PipelineConfig pipeline_config_from_json(std::string_view text, PipelineConfig base = {});

PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base = {});

}  // namespace instobj
