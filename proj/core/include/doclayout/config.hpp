#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "doclayout/types.hpp"

namespace doclayout {

// Parses the key-value configuration format:
//
//   [thresholds]
//   paragraph = 0.25
//   text_box = 0.25
//   image = 0.35
//   table = 0.35
//
//   [image_model]
//   override = true
//   threshold = 0.35
//   fallback_to_general = true
//
//   [post_processing]
//   hull_fill = ["table"]
//
// Keys not present keep their paper_defaults() value. Unknown sections or
// keys, and values of the wrong type, throw MalformedInput.
EnsembleConfig parse_config(std::string_view text);

EnsembleConfig load_config(const std::filesystem::path& path);

// Inverse of parse_config; every field is written.
std::string format_config(const EnsembleConfig& config);

}  // namespace doclayout
