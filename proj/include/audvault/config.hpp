#pragma once

#include "audvault/backend.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace audvault {

struct Config {
    std::vector<Repository> repositories;
    std::optional<std::filesystem::path> cache_root;
    std::optional<std::filesystem::path> source;  // file the config was read from
};

/// Parses a config document:
///
///     cache_root: /data/cache
///     repositories:
///       - name: local
///         host: /srv/datasets
///         backend: file-system
Config parse_config(const std::string& text);

/// Reads `explicit_path` when given (it must exist), else the first of
/// $AUDVAULT_CONFIG, ./audvault.yaml and ~/.config/audvault/config.yaml.
/// No file at all gives an empty config. $AUDVAULT_HOST_<NAME> overrides the
/// host of repository <name> (upper-cased, non-alphanumerics as '_').
Config load_config(const std::optional<std::filesystem::path>& explicit_path = std::nullopt);

/// flag, then $AUDVAULT_CACHE_ROOT, then the config, then ~/.cache/audvault.
std::filesystem::path resolve_cache_root(const std::optional<std::filesystem::path>& flag, const Config& config);

}  // namespace audvault
