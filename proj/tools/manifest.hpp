#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace ember::cli {

// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::string file_digest(const std::filesystem::path& path);

// Provenance record written next to every artifact.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void set_config(const nlohmann::json& config) { doc_["config"] = config; }
  void set_seed(std::uint64_t seed) { doc_["seed"] = seed; }
  void set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }
  void input(const std::string& role, const std::filesystem::path& path);
  void output(const std::string& role, const std::filesystem::path& path);

  // Stamps the finish time and writes pretty JSON.
  void write(const std::filesystem::path& path);

 private:
  nlohmann::json doc_;
};

std::string utc_timestamp();

}  // namespace ember::cli
