#include "dualres/device_io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <string_view>

#include <fmt/format.h>

#include "dualres/errors.hpp"

namespace dualres {
namespace {

struct Field {
  std::string_view key;
  double DeviceParams::*member;
  bool lifetime;
};

constexpr std::array<Field, 20> kFields{{
    {"resonator_freq_a", &DeviceParams::resonator_freq_a, false},
    {"resonator_freq_b", &DeviceParams::resonator_freq_b, false},
    {"qubit_max_freq_1", &DeviceParams::qubit_max_freq_1, false},
    {"qubit_max_freq_2", &DeviceParams::qubit_max_freq_2, false},
    {"anharmonicity_1", &DeviceParams::anharmonicity_1, false},
    {"anharmonicity_2", &DeviceParams::anharmonicity_2, false},
    {"g_a1", &DeviceParams::g_a1, false},
    {"g_a2", &DeviceParams::g_a2, false},
    {"g_b1", &DeviceParams::g_b1, false},
    {"g_b2", &DeviceParams::g_b2, false},
    {"g_ab", &DeviceParams::g_ab, false},
    {"g_12", &DeviceParams::g_12, false},
    {"flux_period_1", &DeviceParams::flux_period_1, false},
    {"flux_period_2", &DeviceParams::flux_period_2, false},
    {"flux_offset_1", &DeviceParams::flux_offset_1, false},
    {"flux_offset_2", &DeviceParams::flux_offset_2, false},
    {"t1_qubit1", &DeviceParams::t1_qubit1, true},
    {"t1_qubit2", &DeviceParams::t1_qubit2, true},
    {"t2_qubit1", &DeviceParams::t2_qubit1, true},
    {"t2_qubit2", &DeviceParams::t2_qubit2, true},
}};

const Field* find_field(std::string_view key) {
  for (const auto& f : kFields) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

DeviceParams device_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("device document must be a JSON object");
  }
  DeviceParams params;
  for (const auto& [key, value] : doc.items()) {
    const Field* field = find_field(key);
    if (field == nullptr) {
      throw ConfigError(fmt::format("unknown device key '{}'", key));
    }
    if (value.is_null() && field->lifetime) {
      params.*(field->member) = std::numeric_limits<double>::infinity();
    } else if (value.is_number()) {
      params.*(field->member) = value.get<double>();
    } else {
      throw ConfigError(fmt::format("device key '{}' must be a number{}", key, field->lifetime ? " or null" : ""));
    }
  }
  params.validate();
  return params;
}

nlohmann::json device_to_json(const DeviceParams& params) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& f : kFields) {
    const double v = params.*(f.member);
    if (std::isinf(v) && f.lifetime) {
      doc[std::string(f.key)] = nullptr;
    } else {
      doc[std::string(f.key)] = v;
    }
  }
  return doc;
}

DeviceParams load_device(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open device file '{}'", path.string()));
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("device file '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return device_from_json(doc);
}

}  // namespace dualres
