#pragma once

#include "audvault/backend.hpp"
#include "audvault/cache.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace audvault {

struct PublishReport {
    std::string version;
    std::optional<std::string> previous_version;
    std::vector<std::string> uploaded_archives;  // remote paths, deps last
    std::vector<std::string> added;
    std::vector<std::string> modified;
    std::size_t reused = 0;   // unchanged plus carried entries
    std::size_t deleted = 0;
    std::uint64_t total_bytes_uploaded = 0;
};

struct PublishOptions {
    std::optional<std::string> previous;  // default: latest version on the backend
    bool from_scratch = false;            // ignore any previous version
};

/// Publishes the dataset folder `root` as `version` of the dataset it declares.
PublishReport publish(const std::filesystem::path& root, const std::string& version, Backend& backend,
                      const PublishOptions& opts = {});

struct RemoveReport {
    std::vector<std::string> files;
    std::vector<std::string> versions_updated;
    std::vector<std::string> archives_replaced;
};

/// Flags `files` as removed in every published version of `name` and replaces
/// their archives by zero-length placeholders. When `cache` is given, cached
/// copies are deleted and cached dependency tables rewritten as well.
RemoveReport remove_media(const std::string& name, const std::vector<std::string>& files, Backend& backend,
                          const Cache* cache = nullptr);

/// Exclusive lock object `<name>/.lock` on the backend; a second holder fails
/// with Conflict. Locks older than `stale_after` are broken.
class BackendLock {
public:
    BackendLock(Backend& backend, const std::string& name,
                std::chrono::milliseconds stale_after = std::chrono::hours(1));
    ~BackendLock();
    BackendLock(const BackendLock&) = delete;
    BackendLock& operator=(const BackendLock&) = delete;

private:
    Backend& backend_;
    BackendPath path_;
};

}  // namespace audvault
