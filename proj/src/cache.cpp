#include "audvault/cache.hpp"

#include "audvault/csv.hpp"
#include "audvault/digest.hpp"
#include "audvault/error.hpp"
#include "audvault/snapshot.hpp"
#include "audvault/tempdir.hpp"
#include "audvault/version.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>

namespace audvault {

namespace fs = std::filesystem;
using namespace std::chrono_literals;

std::string snapshot_file_name(const std::string& table_id) { return "db." + table_id + ".snapshot"; }

ConversionManifest ConversionManifest::load(const fs::path& file) {
    ConversionManifest m;
    std::error_code ec;
    if (!fs::exists(file, ec)) return m;
    const std::string text = read_file(file);
    csv::Reader reader(text);
    std::vector<csv::Cell> rec;
    reader.next(rec);  // header
    while (reader.next(rec)) {
        if (rec.size() != 3) continue;
        m.entries_[rec[0].text] = Entry{rec[1].text, rec[2].text};
    }
    return m;
}

void ConversionManifest::save(const fs::path& file) const {
    std::string out = "file,source_digest,output_digest\n";
    for (const auto& [path, e] : entries_) {
        csv::append_field(out, path);
        out += ',' + e.source_digest + ',' + e.output_digest + '\n';
    }
    atomic_write(file, out);
}

const ConversionManifest::Entry* ConversionManifest::find(const std::string& path) const {
    auto it = entries_.find(path);
    return it == entries_.end() ? nullptr : &it->second;
}

void ConversionManifest::set(const std::string& path, Entry e) { entries_[path] = std::move(e); }
void ConversionManifest::erase(const std::string& path) { entries_.erase(path); }

CacheLock::CacheLock(const fs::path& lock_file, std::chrono::milliseconds timeout,
                     std::chrono::milliseconds stale_after)
    : file_(lock_file) {
    fs::create_directories(file_.parent_path());
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
        const int fd = ::open(file_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd < 0) fail(ErrorCode::Io, "cannot open lock file '" + file_.string() + "'");
        if (::flock(fd, LOCK_EX | LOCK_NB) == 0) {
            struct stat held{}, current{};
            if (::fstat(fd, &held) == 0 && ::stat(file_.c_str(), &current) == 0 && held.st_ino == current.st_ino &&
                held.st_dev == current.st_dev) {
                fd_ = fd;
                break;
            }
            // The file was unlinked by the previous holder; retry on the new one.
            ::close(fd);
            continue;
        }
        std::error_code ec;
        const auto mtime = fs::last_write_time(file_, ec);
        if (!ec && fs::file_time_type::clock::now() - mtime > stale_after) {
            fs::remove(file_, ec);
        }
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline) {
            fail(ErrorCode::Timeout, "timed out waiting for cache lock '" + file_.string() + "'");
        }
        std::this_thread::sleep_for(20ms);
    }
    write_heartbeat();
    const auto interval = std::clamp<std::chrono::milliseconds>(stale_after / 4, 10ms, 60'000ms);
    heartbeat_ = std::jthread([this, interval](std::stop_token stop) {
        std::unique_lock lk(mutex_);
        while (!stop.stop_requested()) {
            if (cv_.wait_for(lk, stop, interval, [] { return false; })) break;
            if (stop.stop_requested()) break;
            write_heartbeat();
        }
    });
}


void CacheLock::write_heartbeat() {
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    const std::string text = std::to_string(::getpid()) + " " + std::to_string(now) + "\n";
    if (::ftruncate(fd_, 0) == 0) {
        [[maybe_unused]] auto n = ::pwrite(fd_, text.data(), text.size(), 0);
    }
}

CacheLock::~CacheLock() {
    heartbeat_.request_stop();
    if (heartbeat_.joinable()) heartbeat_.join();
    if (fd_ >= 0) {
        // Only unlink our own file; a broken stale lock may have been replaced.
        struct stat held{}, current{};
        if (::fstat(fd_, &held) == 0 && ::stat(file_.c_str(), &current) == 0 && held.st_ino == current.st_ino &&
            held.st_dev == current.st_dev) {
            ::unlink(file_.c_str());
        }
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

Cache::Cache(fs::path root, bool link_mode) : root_(std::move(root)), link_mode_(link_mode) {}

fs::path Cache::folder(const CacheKey& key) const {
    return root_ / key.repository / key.name / key.version / key.flavour_id;
}

fs::path Cache::lock_file(const CacheKey& key) const {
    return root_ / key.repository / key.name / key.version / ("." + key.flavour_id + ".lock");
}

std::optional<fs::path> Cache::lookup(const CacheKey& key, const std::string& path, const DependencyTable& deps,
                                      const ConversionManifest* manifest) const {
    const DepEntry* e = deps.find(path);
    if (!e || e->removed) return std::nullopt;
    const fs::path file = folder(key) / path;
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) return std::nullopt;
    std::string digest;
    try {
        digest = file_digest(file);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (e->kind == FileKind::Media && key.flavour_id != "raw") {
        ConversionManifest loaded;
        if (!manifest) {
            loaded = ConversionManifest::load(folder(key) / kManifestFile);
            manifest = &loaded;
        }
        const ConversionManifest::Entry* m = manifest->find(path);
        if (!m || m->source_digest != e->digest || m->output_digest != digest) return std::nullopt;
        return file;
    }
    if (digest != e->digest) return std::nullopt;
    return file;
}

std::vector<std::pair<CacheKey, fs::path>> Cache::sibling_sources(const CacheKey& key, const std::string& path,
                                                                  const DependencyTable& deps) const {
    std::vector<std::pair<CacheKey, fs::path>> out;
    const DepEntry* e = deps.find(path);
    if (!e || e->removed) return out;
    auto versions = cached_versions(key.repository, key.name, key.flavour_id);
    std::reverse(versions.begin(), versions.end());
    for (const auto& v : versions) {
        if (v == key.version) continue;
        CacheKey other = key;
        other.version = v;
        const auto other_deps = cached_deps(other);
        if (!other_deps) continue;
        const DepEntry* oe = other_deps->find(path);
        if (!oe || oe->removed || oe->digest != e->digest) continue;
        if (auto file = lookup(other, path, *other_deps)) out.emplace_back(other, *file);
    }
    return out;
}

void Cache::store(const CacheKey& key, const std::string& path, const fs::path& source) const {
    const fs::path target = folder(key) / path;
    fs::create_directories(target.parent_path());
    if (link_mode_) {
        const fs::path tmp = target.string() + ".tmp." + unique_suffix();
        std::error_code ec;
        fs::create_hard_link(source, tmp, ec);
        if (!ec) {
            fs::rename(tmp, target, ec);
            if (!ec) return;
            fs::remove(tmp, ec);
        }
    }
    atomic_copy(source, target);
}

std::optional<DependencyTable> Cache::cached_deps(const CacheKey& key) const {
    const fs::path file = folder(key) / kDepsFile;
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) return std::nullopt;
    try {
        return parse_deps(read_file(file), key.version);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void Cache::snapshot_tables(const CacheKey& key, const std::map<std::string, Table>& tables,
                            const DependencyTable& deps) const {
    for (const auto& [id, t] : tables) {
        const DepEntry* e = deps.find(table_file_name(id));
        if (!e) continue;
        write_snapshot(t, e->digest, folder(key) / snapshot_file_name(id));
    }
}

Table Cache::load_table(const CacheKey& key, const std::string& table_id, const TableDecl& decl,
                        const SchemeRegistry& schemes, const DependencyTable& deps, std::uint32_t format_tag) const {
    const std::string digest = deps.entry(table_file_name(table_id)).digest;
    const fs::path snap = folder(key) / snapshot_file_name(table_id);
    if (auto t = read_snapshot(snap, digest, format_tag)) return std::move(*t);
    Table t = parse_table_csv(read_file(folder(key) / table_file_name(table_id)), table_id, decl, schemes);
    write_snapshot(t, digest, snap, format_tag);
    return t;
}

CacheLock Cache::lock(const CacheKey& key, std::chrono::milliseconds timeout) const {
    return CacheLock(lock_file(key), timeout);
}

std::vector<std::string> Cache::cached_versions(const std::string& repository, const std::string& name,
                                                const std::string& flavour_id) const {
    std::vector<std::string> out;
    const fs::path base = root_ / repository / name;
    std::error_code ec;
    if (!fs::is_directory(base, ec)) return out;
    for (const auto& entry : fs::directory_iterator(base)) {
        if (!entry.is_directory()) continue;
        if (fs::is_regular_file(entry.path() / flavour_id / kDepsFile, ec)) {
            out.push_back(entry.path().filename().string());
        }
    }
    sort_versions(out);
    return out;
}

void Cache::clear() const {
    std::error_code ec;
    if (!fs::exists(root_, ec)) return;
    for (const auto& entry : fs::directory_iterator(root_)) fs::remove_all(entry.path());
}

}  // namespace audvault
