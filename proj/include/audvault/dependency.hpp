#pragma once

#include "audvault/duration.hpp"
#include "audvault/wav.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace audvault {

enum class FileKind { Media, Table, Header, Attachment };

const char* file_kind_name(FileKind k);
FileKind parse_file_kind(std::string_view s);

/// One row of the dependency table.
struct DepEntry {
    std::string file;
    FileKind kind = FileKind::Media;
    std::string archive;         // backend object id without ".zip"
    std::string digest;          // MD5 of the published content; zeros once removed
    std::string origin_version;  // version whose folder holds the archive
    bool removed = false;
    std::optional<int> bit_depth;
    std::optional<int> channels;
    std::optional<int> sampling_rate;
    std::optional<Duration> duration;
    std::string format;

    friend bool operator==(const DepEntry&, const DepEntry&) = default;
};

/// media/<first two digest chars>/<digest>
std::string media_archive_id(const std::string& digest);
/// meta/<table id>
std::string table_archive_id(const std::string& table_id);
inline constexpr const char* kHeaderArchiveId = "db.yaml";

/// Table id for a root-level "db.<id>.csv" name, else nullopt.
std::optional<std::string> table_id_from_file(std::string_view path);

/// Per-version record of every published file.
class DependencyTable {
public:
    DependencyTable() = default;
    explicit DependencyTable(std::string dataset_version, std::vector<DepEntry> entries = {});

    const std::string& dataset_version() const { return version_; }
    const std::map<std::string, DepEntry>& entries() const { return entries_; }
    bool contains(std::string_view path) const { return entries_.contains(std::string(path)); }
    const DepEntry& entry(std::string_view path) const;  // throws NotFound
    const DepEntry* find(std::string_view path) const;

    void upsert(DepEntry e);
    void erase(std::string_view path);

    std::vector<std::string> media() const;   // non-removed media paths, sorted
    std::vector<std::string> removed_media() const;
    std::vector<std::string> tables() const;  // table ids, sorted
    const std::string& origin_version(std::string_view path) const;
    int sampling_rate(std::string_view path) const;
    bool is_removed(std::string_view path) const;

    friend bool operator==(const DependencyTable&, const DependencyTable&) = default;

private:
    std::string version_;
    std::map<std::string, DepEntry> entries_;
};

inline constexpr const char* kDepsFile = "db.deps.csv";

/// Fixed columns, rows sorted by path; byte-identical for equal tables.
std::string serialize_deps(const DependencyTable& d);
DependencyTable parse_deps(std::string_view text, const std::string& dataset_version);

struct ChangeSet {
    std::vector<std::string> added;
    std::vector<std::string> modified;
    std::vector<std::string> unchanged;
    std::vector<std::string> deleted;
    /// Paths absent from the root but kept from the previous version because
    /// tables still reference them. Filled by the publisher, never by diff.
    std::vector<std::string> carried;

    std::map<std::string, std::string> digests;  // digest of every file in the root
    std::map<std::string, FileKind> kinds;
};

/// Dataset files under `root`: db.yaml, root-level db.<id>.csv files and
/// everything else as media. Hidden entries and declared attachment paths
/// are skipped. Paths are relative with '/' separators, sorted.
std::map<std::string, FileKind> list_dataset_files(const std::filesystem::path& root);

/// Classifies every dataset file in `root` against `previous` by digest.
ChangeSet diff(const std::filesystem::path& root, const DependencyTable* previous);

/// Builds the dependency table of `new_version`. `media_meta` must hold an
/// entry for every added or modified media file.
DependencyTable apply(const DependencyTable* previous, const ChangeSet& cs, const std::string& new_version,
                      const std::map<std::string, MediaInfo>& media_meta);

}  // namespace audvault
