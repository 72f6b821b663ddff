#include "audvault/backend.hpp"

#include "audvault/error.hpp"
#include "audvault/tempdir.hpp"
#include "audvault/version.hpp"
#include "audvault/zip.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

namespace audvault {

namespace fs = std::filesystem;

BackendPath::BackendPath(std::string_view path) {
    std::size_t start = 0;
    while (start < path.size()) {
        const std::size_t end = std::min(path.find('/', start), path.size());
        const std::string_view seg = path.substr(start, end - start);
        if (seg.empty() || seg == "." || seg == "..") {
            fail(ErrorCode::InvalidArgument, "invalid backend path '" + std::string(path) + "'");
        }
        segments_.emplace_back(seg);
        start = end + 1;
    }
    if (!path.empty() && path.back() == '/') {
        fail(ErrorCode::InvalidArgument, "invalid backend path '" + std::string(path) + "'");
    }
}

std::string BackendPath::str() const {
    std::string out;
    for (const auto& s : segments_) {
        if (!out.empty()) out += '/';
        out += s;
    }
    return out;
}

BackendPath BackendPath::operator/(std::string_view child) const {
    BackendPath tail(child);
    BackendPath out = *this;
    out.segments_.insert(out.segments_.end(), tail.segments_.begin(), tail.segments_.end());
    return out;
}

void Backend::check_enabled() const {
    if (!enabled_) fail(ErrorCode::Io, "backend of repository '" + repo_.name + "' is disabled");
}

void Backend::put_file(const fs::path& local, const BackendPath& remote) {
    ++counters_.puts;
    check_enabled();
    do_put(local, remote);
}

bool Backend::put_exclusive(std::string_view content, const BackendPath& remote) {
    ++counters_.puts;
    check_enabled();
    return do_put_exclusive(content, remote);
}

void Backend::get_file(const BackendPath& remote, const fs::path& local) {
    ++counters_.gets;
    check_enabled();
    do_get(remote, local);
}

bool Backend::exists(const BackendPath& remote) {
    ++counters_.exists;
    check_enabled();
    return do_exists(remote);
}

std::vector<std::string> Backend::ls(const BackendPath& prefix) {
    ++counters_.lists;
    check_enabled();
    return do_ls(prefix);
}

void Backend::remove(const BackendPath& remote) {
    ++counters_.removes;
    check_enabled();
    do_remove(remote);
}

FileSystemBackend::FileSystemBackend(Repository repo) : Backend(std::move(repo)) {
    if (repository().name.empty()) fail(ErrorCode::InvalidArgument, "repository name must not be empty");
    if (repository().host.empty()) fail(ErrorCode::InvalidArgument, "repository host must not be empty");
    root_ = fs::path(repository().host) / repository().name;
}

fs::path FileSystemBackend::object_path(const BackendPath& p) const {
    fs::path out = root_;
    for (const auto& s : p.segments()) out /= s;
    return out;
}

namespace {

bool is_temp_name(const std::string& name) { return name.find(".tmp.") != std::string::npos; }

}  // namespace

void FileSystemBackend::do_put(const fs::path& local, const BackendPath& remote) {
    if (remote.empty()) fail(ErrorCode::InvalidArgument, "cannot put to the repository root");
    if (!fs::is_regular_file(local)) fail(ErrorCode::NotFound, "cannot upload missing file '" + local.string() + "'");
    atomic_copy(local, object_path(remote));
}

bool FileSystemBackend::do_put_exclusive(std::string_view content, const BackendPath& remote) {
    const fs::path target = object_path(remote);
    fs::create_directories(target.parent_path());
    const int fd = ::open(target.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd < 0) {
        if (errno == EEXIST) return false;
        fail(ErrorCode::Io, "cannot create '" + target.string() + "'");
    }
    const auto n = ::write(fd, content.data(), content.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(content.size())) {
        fs::remove(target);
        fail(ErrorCode::Io, "short write on '" + target.string() + "'");
    }
    return true;
}

void FileSystemBackend::do_get(const BackendPath& remote, const fs::path& local) {
    const fs::path src = object_path(remote);
    std::error_code ec;
    const auto size = fs::file_size(src, ec);
    if (ec) fail(ErrorCode::NotFound, "object '" + remote.str() + "' not found in repository '" + repository().name + "'");
    atomic_copy(src, local);
    if (fs::file_size(local) != size) {
        fs::remove(local, ec);
        fail(ErrorCode::Io, "size mismatch downloading '" + remote.str() + "'");
    }
}

bool FileSystemBackend::do_exists(const BackendPath& remote) {
    return fs::is_regular_file(object_path(remote));
}

std::vector<std::string> FileSystemBackend::do_ls(const BackendPath& prefix) {
    const fs::path base = object_path(prefix);
    std::vector<std::string> out;
    std::error_code ec;
    if (fs::is_regular_file(base, ec)) {
        out.push_back(prefix.str());
        return out;
    }
    if (!fs::is_directory(base, ec)) return out;
    for (auto it = fs::recursive_directory_iterator(base); it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file() || is_temp_name(it->path().filename().string())) continue;
        out.push_back(fs::relative(it->path(), root_).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void FileSystemBackend::do_remove(const BackendPath& remote) {
    const fs::path p = object_path(remote);
    if (!fs::is_regular_file(p)) fail(ErrorCode::NotFound, "object '" + remote.str() + "' not found");
    fs::remove(p);
}

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, BackendFactory> factories;

    Registry() {
        factories.emplace(kFileSystemBackend,
                          [](const Repository& r) { return std::make_unique<FileSystemBackend>(r); });
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_backend(const std::string& kind, BackendFactory factory) {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    if (kind.empty()) fail(ErrorCode::InvalidArgument, "backend kind must not be empty");
    if (!r.factories.emplace(kind, std::move(factory)).second) {
        fail(ErrorCode::Conflict, "backend '" + kind + "' is already registered");
    }
}

bool backend_registered(const std::string& kind) {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    return r.factories.contains(kind);
}

std::unique_ptr<Backend> open_backend(const Repository& repo) {
    BackendFactory factory;
    {
        Registry& r = registry();
        std::lock_guard lock(r.mutex);
        auto it = r.factories.find(repo.backend_kind);
        if (it == r.factories.end()) fail(ErrorCode::NotFound, "unknown backend '" + repo.backend_kind + "'");
        factory = it->second;
    }
    return factory(repo);
}

Backends open_backends(const std::vector<Repository>& repos) {
    Backends out;
    for (const auto& r : repos) out.push_back(std::shared_ptr<Backend>(open_backend(r)));
    return out;
}

namespace layout {

BackendPath dataset(const std::string& name) { return BackendPath(name); }
BackendPath version_dir(const std::string& name, const std::string& version) { return dataset(name) / version; }
BackendPath header(const std::string& name, const std::string& version) {
    return version_dir(name, version) / "db.yaml.zip";
}
BackendPath deps(const std::string& name, const std::string& version) {
    return version_dir(name, version) / "db.deps.zip";
}
BackendPath archive(const std::string& name, const std::string& version, const std::string& archive_id) {
    return version_dir(name, version) / (archive_id + ".zip");
}
BackendPath lock(const std::string& name) { return dataset(name) / ".lock"; }

}  // namespace layout

std::vector<std::string> list_versions(Backend& backend, const std::string& name) {
    std::vector<std::string> versions;
    const std::string prefix = name + "/";
    for (const auto& p : backend.ls(layout::dataset(name))) {
        if (!p.starts_with(prefix) || !p.ends_with("/db.deps.zip")) continue;
        const std::string mid = p.substr(prefix.size(), p.size() - prefix.size() - 12);
        if (mid.find('/') == std::string::npos && is_valid_version(mid)) versions.push_back(mid);
    }
    sort_versions(versions);
    return versions;
}

std::vector<std::string> list_datasets(Backend& backend) {
    std::set<std::string> names;
    for (const auto& p : backend.ls()) {
        const auto slash = p.find('/');
        if (slash == std::string::npos) continue;
        // <name>/<version>/db.deps.zip marks a complete version
        if (p.ends_with("/db.deps.zip") && std::count(p.begin(), p.end(), '/') == 2) names.insert(p.substr(0, slash));
    }
    return {names.begin(), names.end()};
}

std::shared_ptr<Backend> resolve_repository(const std::string& name, const std::optional<std::string>& version,
                                            const Backends& backends) {
    if (backends.empty()) fail(ErrorCode::InvalidArgument, "no repositories configured");
    for (const auto& b : backends) {
        const bool found = version ? b->exists(layout::deps(name, *version)) : !list_versions(*b, name).empty();
        if (found) return b;
    }
    fail(ErrorCode::NotFound, "dataset '" + name + "'" + (version ? " version " + *version : std::string()) +
                                  " not found in any repository");
}

std::vector<std::string> fetch_archive(Backend& backend, const BackendPath& remote, const fs::path& dest) {
    TempDir tmp(dest, ".fetch");
    const fs::path local = tmp.path() / "archive.zip";
    backend.get_file(remote, local);
    return zip_extract(local, dest);
}

void upload_archive(Backend& backend, const std::vector<std::string>& files, const fs::path& root,
                    const BackendPath& remote) {
    TempDir tmp({}, "audvault-upload");
    const fs::path local = tmp.path() / "archive.zip";
    zip_create(files, root, local);
    backend.put_file(local, remote);
}

}  // namespace audvault
