#include "dualres/table_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "dualres/errors.hpp"

namespace dualres {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{}", value);
}

nlohmann::json number_or_null(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

void write_chevron_csv(const ChevronMap& chevron, std::ostream& out, const std::optional<ContrastSpec>& contrast) {
  out << "detuning_mhz,tau_ns,p1";
  if (contrast) out << ",contrast";
  out << '\n';
  for (std::size_t r = 0; r < chevron.detunings_mhz.size(); ++r) {
    for (std::size_t c = 0; c < chevron.times_ns.size(); ++c) {
      const double p = chevron.p1(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      out << format_number(chevron.detunings_mhz[r]) << ',' << format_number(chevron.times_ns[c]) << ','
          << format_number(p);
      if (contrast) out << ',' << format_number(contrast->scale * p + contrast->baseline);
      out << '\n';
    }
  }
}

nlohmann::json fit_to_json(const FitOutcome& fit) {
  nlohmann::json estimates = nlohmann::json::object();
  nlohmann::json sigmas = nlohmann::json::object();
  for (const auto& p : fit.parameters) {
    estimates[p.name] = number_or_null(p.value);
    sigmas[p.name] = number_or_null(p.sigma);
  }
  return {{"model", fit.model},
          {"estimates", estimates},
          {"sigmas", sigmas},
          {"residual_rms", number_or_null(fit.residual_rms)},
          {"converged", fit.converged},
          {"iterations", fit.iterations}};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

OutputDirectory::OutputDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", dir_.string(), ec.message()));
}

void OutputDirectory::write(const std::string& name, const std::string& content) {
  const auto target = dir_ / name;
  std::ofstream out(target, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", target.string()));
  out << content;
  if (!out) throw ConfigError(fmt::format("write to {} failed", target.string()));
  checksums_[name] = sha256_hex(content);
}

void OutputDirectory::write_manifest(const nlohmann::json& config) {
  nlohmann::json artifacts = nlohmann::json::object();
  for (const auto& [name, digest] : checksums_) artifacts[name] = {{"sha256", digest}};
  const nlohmann::json manifest = {{"config", config}, {"artifacts", artifacts}};
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace dualres
