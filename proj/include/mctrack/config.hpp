#pragma once

#include "mctrack/tracker.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace mctrack::config {

/// Reads the tracker configuration document. Missing keys keep their
/// defaults; keys starting with '_' are comments; any other unknown key is a
/// ConfigError. A `per_category` object replaces the built-in overrides and
/// each of its entries is applied on top of the section's `default`.
tracker::TrackerConfig parse_tracker_config_text(std::string_view text);
tracker::TrackerConfig load_tracker_config(const std::filesystem::path& path);

/// Full document for `cfg`, every key written out.
std::string tracker_config_to_json(const tracker::TrackerConfig& cfg);

}  // namespace mctrack::config
