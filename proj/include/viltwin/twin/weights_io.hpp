#pragma once

#include <filesystem>

#include <json.hpp>

#include "viltwin/twin/network.hpp"

namespace viltwin::twin {

/// {"version": 1, "config": {T, sizes}, "normalizer": {...},
///  "layers": {"encoder.w_z": [[row], ...], "encoder.b_z": [...], ...}}
nlohmann::json weights_to_json(const TwinNetwork& net);

/// Throws ValidationError naming the offending field.
TwinNetwork weights_from_json(const nlohmann::json& doc);

void save_weights(const TwinNetwork& net, const std::filesystem::path& path);
TwinNetwork load_weights(const std::filesystem::path& path);

}  // namespace viltwin::twin
