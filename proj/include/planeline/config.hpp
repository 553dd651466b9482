#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "planeline/finalize.hpp"
#include "planeline/optim.hpp"

namespace planeline {

struct PipelineConfig {
  OptimConfig optim;  // includes the loss weights
  Thresholds thresholds;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys raise
/// Error(kUnknownConfigKey), malformed values Error(kBadConfig).
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Sets one field by name; same errors as parse_config.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);

/// Every recognised key, in file order.
std::vector<std::string> config_keys();

/// All fields as `key = value` lines; parse_config of the result is lossless.
std::string format_config(const PipelineConfig& config);

}  // namespace planeline
