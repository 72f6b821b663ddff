#pragma once

#include "audvault/database.hpp"
#include "audvault/dependency.hpp"
#include "audvault/snapshot.hpp"
#include "audvault/table.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace audvault {

/// Identifies one materialised dataset folder. The repository segment keeps
/// equally named datasets of different repositories apart.
struct CacheKey {
    std::string repository;
    std::string name;
    std::string version;
    std::string flavour_id;
    friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

/// Records which raw content each converted media file was produced from.
/// Only needed for non-raw flavours, whose files differ from the digests in
/// the dependency table.
class ConversionManifest {
public:
    struct Entry {
        std::string source_digest;  // raw digest from the dependency table
        std::string output_digest;  // digest of the converted file on disk
    };

    static ConversionManifest load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    const Entry* find(const std::string& path) const;
    void set(const std::string& path, Entry e);
    void erase(const std::string& path);

private:
    std::map<std::string, Entry> entries_;
};

inline constexpr const char* kManifestFile = ".audvault-manifest.csv";
inline constexpr const char* kCompleteMarker = ".audvault-complete";

/// Exclusive lease on a cache key, held through flock() on a lock file
/// beside the key folder. A heartbeat thread refreshes the timestamp in the
/// file; a lock whose heartbeat is older than `stale_after` may be broken.
class CacheLock {
public:
    CacheLock(const std::filesystem::path& lock_file, std::chrono::milliseconds timeout,
              std::chrono::milliseconds stale_after = std::chrono::hours(1));
    ~CacheLock();
    CacheLock(const CacheLock&) = delete;
    CacheLock& operator=(const CacheLock&) = delete;

private:
    void write_heartbeat();

    std::filesystem::path file_;
    int fd_ = -1;
    std::mutex mutex_;
    std::condition_variable_any cv_;
    std::jthread heartbeat_;
};

/// Local cache: `<root>/<repository>/<name>/<version>/<flavour_id>/`.
class Cache {
public:
    explicit Cache(std::filesystem::path root, bool link_mode = false);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path folder(const CacheKey& key) const;
    std::filesystem::path lock_file(const CacheKey& key) const;

    /// Hit iff the file exists and its content matches the dependency table
    /// (through `manifest` for converted media).
    std::optional<std::filesystem::path> lookup(const CacheKey& key, const std::string& path,
                                                const DependencyTable& deps,
                                                const ConversionManifest* manifest = nullptr) const;

    /// Other cached versions (same repository, dataset and flavour) holding a
    /// valid copy of `path` with the digest `deps` records; newest first.
    std::vector<std::pair<CacheKey, std::filesystem::path>> sibling_sources(const CacheKey& key,
                                                                            const std::string& path,
                                                                            const DependencyTable& deps) const;

    /// Atomic placement of `source` at `path` inside the key folder.
    void store(const CacheKey& key, const std::string& path, const std::filesystem::path& source) const;

    /// Cached dependency table of a key, if present and parsable.
    std::optional<DependencyTable> cached_deps(const CacheKey& key) const;

    /// Writes a binary snapshot next to each table's CSV.
    void snapshot_tables(const CacheKey& key, const std::map<std::string, Table>& tables,
                         const DependencyTable& deps) const;

    /// Snapshot-first table read; falls back to parsing the CSV (and
    /// rewrites the snapshot) when the snapshot is missing, stale, or corrupt.
    Table load_table(const CacheKey& key, const std::string& table_id, const TableDecl& decl,
                     const SchemeRegistry& schemes, const DependencyTable& deps,
                     std::uint32_t format_tag = kSnapshotFormat) const;

    CacheLock lock(const CacheKey& key, std::chrono::milliseconds timeout) const;

    /// Versions of `name` with a cached dependency table under `flavour_id`, ascending.
    std::vector<std::string> cached_versions(const std::string& repository, const std::string& name,
                                             const std::string& flavour_id) const;

    /// Removes everything below the root.
    void clear() const;

private:
    std::filesystem::path root_;
    bool link_mode_;
};

std::string snapshot_file_name(const std::string& table_id);  // "db.<id>.snapshot"

}  // namespace audvault
