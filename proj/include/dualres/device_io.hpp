#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dualres/device.hpp"

namespace dualres {

/// Parses a flat device document. Keys are DeviceParams field names; missing
/// keys keep their defaults, unknown keys are rejected. Lifetimes may be null
/// for an infinite (lossless) value.
DeviceParams device_from_json(const nlohmann::json& doc);
nlohmann::json device_to_json(const DeviceParams& params);

DeviceParams load_device(const std::filesystem::path& path);

}  // namespace dualres
