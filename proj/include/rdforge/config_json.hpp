#pragma once

#include <nlohmann/json.hpp>

#include "rdforge/encoder.hpp"

namespace rdforge {

// JSON mapping for the encoder config and task heads, shared by checkpoints
// and run config files. Parsing is strict: unknown keys and wrong types are
// errors; value-range checks stay with EncoderConfig::validate().

nlohmann::json encoder_config_to_json(const EncoderConfig& c);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

nlohmann::json task_heads_to_json(const std::vector<TaskHead>& tasks);
std::vector<TaskHead> task_heads_from_json(const nlohmann::json& j);

}  // namespace rdforge
