#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "dualres/dynamics.hpp"
#include "dualres/fitting.hpp"

namespace dualres {

/// Shortest round-trip decimal, '.' separator regardless of locale.
std::string format_number(double value);

/// JSON number, or null for NaN and infinities.
nlohmann::json number_or_null(double value);

struct ContrastSpec {
  double scale = 1.0;
  double baseline = 0.0;
};

/// Long format: detuning_mhz, tau_ns, p1[, contrast]; detuning-major order.
void write_chevron_csv(const ChevronMap& chevron, std::ostream& out, const std::optional<ContrastSpec>& contrast = {});

nlohmann::json fit_to_json(const FitOutcome& fit);

std::string sha256_hex(const std::string& bytes);

/// Collects artifacts written into one directory and emits manifest.json with
/// the resolved configuration and a SHA-256 of every artifact.
class OutputDirectory {
 public:
  explicit OutputDirectory(std::filesystem::path dir);

  const std::filesystem::path& path() const { return dir_; }
  void write(const std::string& name, const std::string& content);
  void write_manifest(const nlohmann::json& config);

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> checksums_;
};

}  // namespace dualres
