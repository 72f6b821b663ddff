#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace audvault {

/// A named storage location; `backend_kind` selects a registered backend.
struct Repository {
    std::string name;
    std::string host;
    std::string backend_kind = "file-system";
    friend bool operator==(const Repository&, const Repository&) = default;
};

/// Object path below a repository root, e.g. "emodb/1.0.0/db.yaml.zip".
class BackendPath {
public:
    BackendPath() = default;
    BackendPath(std::string_view path);  // throws InvalidArgument on empty or ".." segments
    BackendPath(const char* path) : BackendPath(std::string_view(path)) {}
    BackendPath(const std::string& path) : BackendPath(std::string_view(path)) {}

    const std::vector<std::string>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }
    std::string str() const;
    BackendPath operator/(std::string_view child) const;

    friend bool operator==(const BackendPath&, const BackendPath&) = default;

private:
    std::vector<std::string> segments_;
};

/// Per-operation call counts, including calls refused while disabled.
struct BackendCounters {
    std::atomic<long> puts{0};
    std::atomic<long> gets{0};
    std::atomic<long> exists{0};
    std::atomic<long> lists{0};
    std::atomic<long> removes{0};

    long total() const { return puts + gets + exists + lists + removes; }
    void reset() { puts = gets = exists = lists = removes = 0; }
};

/// Storage abstraction. Public calls are counted, then forwarded to the
/// implementation. Safe to use concurrently for distinct paths.
class Backend {
public:
    explicit Backend(Repository repo) : repo_(std::move(repo)) {}
    virtual ~Backend() = default;
    Backend(const Backend&) = delete;
    Backend& operator=(const Backend&) = delete;

    const Repository& repository() const { return repo_; }

    /// Atomic: the target is either untouched or fully replaced.
    void put_file(const std::filesystem::path& local, const BackendPath& remote);
    /// Creates `remote` holding `content` only if it does not exist yet.
    bool put_exclusive(std::string_view content, const BackendPath& remote);
    /// Writes to a temporary next to `local`, checks the size, then renames.
    void get_file(const BackendPath& remote, const std::filesystem::path& local);
    bool exists(const BackendPath& remote);
    /// All objects below `prefix`, recursively, sorted, as full paths.
    std::vector<std::string> ls(const BackendPath& prefix = {});
    void remove(const BackendPath& remote);

    const BackendCounters& counters() const { return counters_; }
    void reset_counters() { counters_.reset(); }

    /// A disabled backend refuses every call with ErrorCode::Io.
    void set_enabled(bool enabled) { enabled_ = enabled; }
    bool enabled() const { return enabled_; }

protected:
    virtual void do_put(const std::filesystem::path& local, const BackendPath& remote) = 0;
    virtual bool do_put_exclusive(std::string_view content, const BackendPath& remote) = 0;
    virtual void do_get(const BackendPath& remote, const std::filesystem::path& local) = 0;
    virtual bool do_exists(const BackendPath& remote) = 0;
    virtual std::vector<std::string> do_ls(const BackendPath& prefix) = 0;
    virtual void do_remove(const BackendPath& remote) = 0;

private:
    void check_enabled() const;

    Repository repo_;
    BackendCounters counters_;
    std::atomic<bool> enabled_{true};
};

/// Objects live under `<host>/<repository name>/`.
class FileSystemBackend : public Backend {
public:
    explicit FileSystemBackend(Repository repo);
    const std::filesystem::path& root() const { return root_; }

protected:
    void do_put(const std::filesystem::path& local, const BackendPath& remote) override;
    bool do_put_exclusive(std::string_view content, const BackendPath& remote) override;
    void do_get(const BackendPath& remote, const std::filesystem::path& local) override;
    bool do_exists(const BackendPath& remote) override;
    std::vector<std::string> do_ls(const BackendPath& prefix) override;
    void do_remove(const BackendPath& remote) override;

private:
    std::filesystem::path object_path(const BackendPath& p) const;

    std::filesystem::path root_;
};

using BackendFactory = std::function<std::unique_ptr<Backend>(const Repository&)>;

inline constexpr const char* kFileSystemBackend = "file-system";

/// Throws Conflict if `kind` is already registered.
void register_backend(const std::string& kind, BackendFactory factory);
bool backend_registered(const std::string& kind);
/// Throws NotFound for an unregistered kind.
std::unique_ptr<Backend> open_backend(const Repository& repo);

using Backends = std::vector<std::shared_ptr<Backend>>;
Backends open_backends(const std::vector<Repository>& repos);

/// Normative object layout of a dataset inside a repository.
namespace layout {
BackendPath dataset(const std::string& name);
BackendPath version_dir(const std::string& name, const std::string& version);
BackendPath header(const std::string& name, const std::string& version);  // db.yaml.zip
BackendPath deps(const std::string& name, const std::string& version);    // db.deps.zip
BackendPath archive(const std::string& name, const std::string& version, const std::string& archive_id);
BackendPath lock(const std::string& name);                                 // .lock
}  // namespace layout

/// Complete versions (deps object present) of `name`, ascending.
std::vector<std::string> list_versions(Backend& backend, const std::string& name);

/// Dataset names present in the repository, sorted.
std::vector<std::string> list_datasets(Backend& backend);

/// First backend, in order, holding `name` (at `version`, when given).
std::shared_ptr<Backend> resolve_repository(const std::string& name, const std::optional<std::string>& version,
                                            const Backends& backends);

/// Downloads `remote` (a ZIP) and extracts it into `dest`; returns member names.
std::vector<std::string> fetch_archive(Backend& backend, const BackendPath& remote, const std::filesystem::path& dest);

/// Zips `files` under `root` and uploads the archive to `remote`.
void upload_archive(Backend& backend, const std::vector<std::string>& files, const std::filesystem::path& root,
                    const BackendPath& remote);

}  // namespace audvault
