#pragma once

#include "audvault/backend.hpp"
#include "audvault/cache.hpp"
#include "audvault/database.hpp"
#include "audvault/dependency.hpp"
#include "audvault/flavour.hpp"
#include "audvault/header.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace audvault {

struct LoadRequest {
    std::string name;
    std::optional<std::string> version;  // latest when unset
    Flavour flavour;
    std::optional<std::vector<std::string>> tables;  // table ids or '*' globs
    std::optional<std::vector<std::string>> media;   // file paths or '*' globs
    bool only_metadata = false;
};

struct LoadOptions {
    std::filesystem::path cache_root;
    int workers = 4;
    std::chrono::milliseconds lock_timeout = std::chrono::minutes(10);
    bool link_mode = false;  // experimental: hard links instead of copies
};

struct LoadedDataset {
    CacheKey key;
    Header header;
    std::map<std::string, Table> tables;
    std::filesystem::path root;
    std::vector<std::string> removed_media;
    DependencyTable deps;

    const Table& operator[](const std::string& id) const;
    Frame get(const std::string& table_id, const GetOptions& opts = {}) const;
    /// Media paths referenced by the loaded tables that are available on disk.
    std::vector<std::string> media() const;
};

/// Literal match, or fnmatch-style glob when the pattern holds '*', '?' or '['.
bool matches_pattern(const std::string& pattern, const std::string& value);

std::string latest_version(const std::string& name, const Backends& backends);

LoadedDataset load(const LoadRequest& req, const Backends& backends, const LoadOptions& opts);

/// Writes an editable copy (header, all tables, raw media) of a version into `root`.
std::filesystem::path load_to(const std::filesystem::path& root, const std::string& name, const std::string& version,
                              const Backends& backends);

struct AvailableRow {
    std::string name;
    std::string version;
    std::string repository;
    std::string source;
    std::string usage;
    std::optional<std::string> license;
    std::vector<std::string> languages;
};

/// One row per dataset version (or per dataset with `only_latest`), sorted by
/// name then version. Unreachable repositories are skipped with a warning.
std::vector<AvailableRow> available(const Backends& backends, bool only_latest);

/// Fetches only the header archive.
Header info_header(const std::string& name, const std::optional<std::string>& version, const Backends& backends);
std::vector<std::string> info_schemes(const std::string& name, const std::optional<std::string>& version,
                                      const Backends& backends);

/// Fetches only the dependency table of a version (latest when unset).
DependencyTable info_deps(const std::string& name, const std::optional<std::string>& version,
                          const Backends& backends);

/// Names of datasets whose latest header declares `scheme_id`, sorted.
std::vector<std::string> search_by_scheme(const std::string& scheme_id, const Backends& backends);

}  // namespace audvault
