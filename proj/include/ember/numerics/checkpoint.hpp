#pragma once

#include <filesystem>
#include <string>

#include "ember/numerics/params.hpp"
#include "json.hpp"

namespace ember::num {

// Text checkpoint: a magic line, one JSON header line (model configuration,
// seed, ...), then one line per parameter:
//
//   param <path> <d0>[x<d1>] <v0> <v1> ...
//
// Values are written as hexadecimal floats so a save/load cycle is bit-exact.
struct Checkpoint {
  nlohmann::json header;
  ParamStore params;
};

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                     const ParamStore& params);
std::string serialize_checkpoint(const nlohmann::json& header, const ParamStore& params);

Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint parse_checkpoint(const std::string& text);

// Copies values from `source` into `target` for every path in `target`;
// shapes must agree and no path may be missing.
void assign_params(ParamStore& target, const ParamStore& source);

}  // namespace ember::num
