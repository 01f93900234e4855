#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pedtrack/tracker.hpp"

namespace pedtrack {

struct RunConfig {
    TrackerConfig tracker;
    std::uint32_t embedding_dim = 0;  // expected sidecar dimension, 0 accepts any
};

/// Flat "section.key = value" text; '#' starts a comment.
///
/// Unknown keys and malformed values throw ConfigError naming the key (or
/// line). The result is validated before it is returned.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

// Sets one key on `cfg`. Throws ConfigError for unknown keys or bad values.
void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

// Every accepted key, in a stable order.
std::vector<std::string> config_keys();

// "key = value" lines for every key; parse_config of the output reproduces `cfg`.
std::string dump_config(const RunConfig& cfg);

FusionMode parse_fusion_mode(std::string_view text);
const char* to_string(FusionMode mode);

}  // namespace pedtrack
