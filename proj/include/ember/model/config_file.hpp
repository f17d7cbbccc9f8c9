#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ember/model/train.hpp"

namespace ember::model {

// Flat text configuration, one `key = value` per line with dotted keys that
// follow TrainConfig::to_json():
//
//   model.h = 16
//   model.order = HICB
//   split.ratios = 8,1,1
//   lambda = 0.6
//
// '#' starts a comment. Unknown keys, repeated keys and malformed values are
// ConfigErrors naming the line. Keys left out keep their defaults; when
// `dataset` names a known preset and `lambda` is not given, the preset wins.
TrainConfig parse_config_text(std::string_view text);
TrainConfig load_config_file(const std::filesystem::path& path);

// Inverse of parse_config_text: every key, sorted, with k written out.
std::string config_to_text(const TrainConfig& cfg);

// Sets one dotted key on an existing configuration.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

}  // namespace ember::model
