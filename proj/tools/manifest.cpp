#include "manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "ember/error.hpp"
#include "ember/image/ela.hpp"

#ifndef EMBER_VERSION
#define EMBER_VERSION "unknown"
#endif

namespace ember::cli {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_digest(const std::filesystem::path& path) {
  const auto bytes = image::read_file(path);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv) {
  doc_ = {
      {"tool", "ember"},
      {"version", EMBER_VERSION},
      {"command", std::move(command)},
      {"argv", std::move(argv)},
      {"started", utc_timestamp()},
      {"inputs", nlohmann::json::object()},
      {"outputs", nlohmann::json::object()},
  };
}

void RunManifest::input(const std::string& role, const std::filesystem::path& path) {
  doc_["inputs"][role] = {{"path", path.string()},
                          {"fnv1a64", file_digest(path)},
                          {"bytes", std::filesystem::file_size(path)}};
}

void RunManifest::output(const std::string& role, const std::filesystem::path& path) {
  doc_["outputs"][role] = {{"path", path.string()},
                           {"fnv1a64", file_digest(path)},
                           {"bytes", std::filesystem::file_size(path)}};
}

void RunManifest::write(const std::filesystem::path& path) {
  doc_["finished"] = utc_timestamp();
  std::ofstream os(path);
  if (!os) throw IoError(path.string(), "cannot write manifest");
  os << doc_.dump(2) << "\n";
}

}  // namespace ember::cli
