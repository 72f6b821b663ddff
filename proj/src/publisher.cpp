#include "audvault/publisher.hpp"

#include "audvault/database.hpp"
#include "audvault/dependency.hpp"
#include "audvault/digest.hpp"
#include "audvault/error.hpp"
#include "audvault/log.hpp"
#include "audvault/tempdir.hpp"
#include "audvault/version.hpp"
#include "audvault/wav.hpp"
#include "audvault/zip.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <set>

namespace audvault {

namespace fs = std::filesystem;

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

DependencyTable fetch_deps(Backend& backend, const std::string& name, const std::string& version) {
    TempDir tmp({}, "audvault-deps");
    const auto members = fetch_archive(backend, layout::deps(name, version), tmp.path());
    if (members.size() != 1) fail(ErrorCode::Corrupt, "malformed dependency archive of version " + version);
    return parse_deps(read_file(tmp.path() / members.front()), version);
}

std::uint64_t upload(Backend& backend, const std::vector<std::string>& files, const fs::path& root,
                     const BackendPath& remote) {
    TempDir tmp({}, "audvault-upload");
    const fs::path local = tmp.path() / "archive.zip";
    zip_create(files, root, local);
    backend.put_file(local, remote);
    return fs::file_size(local);
}

std::uint64_t upload_deps(Backend& backend, const std::string& name, const DependencyTable& deps) {
    TempDir tmp({}, "audvault-deps");
    write_file(tmp.path() / kDepsFile, serialize_deps(deps));
    return upload(backend, {kDepsFile}, tmp.path(), layout::deps(name, deps.dataset_version()));
}

}  // namespace

BackendLock::BackendLock(Backend& backend, const std::string& name, std::chrono::milliseconds stale_after)
    : backend_(backend), path_(layout::lock(name)) {
    const std::string content = std::to_string(now_ms()) + " " + std::to_string(::getpid()) + "\n";
    if (backend_.put_exclusive(content, path_)) return;

    std::optional<std::int64_t> stamp;
    try {
        TempDir tmp({}, "audvault-lock");
        backend_.get_file(path_, tmp.path() / "lock");
        const std::string text = read_file(tmp.path() / "lock");
        std::int64_t v = 0;
        if (std::from_chars(text.data(), text.data() + text.size(), v).ec == std::errc{}) stamp = v;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NotFound) throw;
    }
    if (stamp && now_ms() - *stamp > stale_after.count()) {
        warn("breaking stale lock on dataset '" + name + "'");
        backend_.remove(path_);
    }
    if (!backend_.put_exclusive(content, path_)) {
        fail(ErrorCode::Conflict, "dataset '" + name + "' is locked by another publisher");
    }
}

BackendLock::~BackendLock() {
    try {
        backend_.remove(path_);
    } catch (const std::exception& e) {
        warn(std::string("cannot release lock: ") + e.what());
    }
}

PublishReport publish(const fs::path& root, const std::string& version, Backend& backend, const PublishOptions& opts) {
    if (!is_valid_version(version)) fail(ErrorCode::InvalidArgument, "invalid version '" + version + "'");
    const Database db = load_database(root);
    const std::string& name = db.header.name;
    layout::dataset(name);  // rejects names unusable as a path segment

    const BackendLock lock(backend, name);
    if (backend.exists(layout::deps(name, version))) {
        fail(ErrorCode::Conflict, "version " + version + " of '" + name + "' already exists");
    }

    PublishReport report;
    report.version = version;
    if (!opts.from_scratch) {
        if (opts.previous) {
            if (!backend.exists(layout::deps(name, *opts.previous))) {
                fail(ErrorCode::NotFound, "previous version " + *opts.previous + " of '" + name + "' not found");
            }
            report.previous_version = opts.previous;
        } else if (auto versions = list_versions(backend, name); !versions.empty()) {
            report.previous_version = versions.back();
        }
    }
    std::optional<DependencyTable> previous;
    if (report.previous_version) previous = fetch_deps(backend, name, *report.previous_version);
    const DependencyTable* prev = previous ? &*previous : nullptr;

    ChangeSet cs = diff(root, prev);
    std::set<std::string> carried;
    for (const auto& f : db.referenced_files()) {
        if (auto k = cs.kinds.find(f); k != cs.kinds.end()) {
            if (k->second == FileKind::Media) continue;
        } else if (prev && prev->contains(f) && prev->entry(f).kind == FileKind::Media) {
            carried.insert(f);
            continue;
        }
        fail(ErrorCode::InvalidArgument, "missing referenced media '" + f + "'");
    }
    cs.carried.assign(carried.begin(), carried.end());
    std::erase_if(cs.deleted, [&](const std::string& f) { return carried.contains(f); });

    std::map<std::string, MediaInfo> meta;
    for (const auto* list : {&cs.added, &cs.modified}) {
        for (const auto& f : *list) {
            if (cs.kinds.at(f) == FileKind::Media) meta.emplace(f, scan_media(root / f));
        }
    }
    const DependencyTable deps = apply(prev, cs, version, meta);

    // Media and tables first, then the header, the dependency table last.
    std::set<std::string> done;
    auto put = [&](const std::vector<std::string>& files, const BackendPath& remote) {
        const std::string key = remote.str();
        if (!done.insert(key).second) return;
        report.total_bytes_uploaded += upload(backend, files, root, remote);
        report.uploaded_archives.push_back(key);
    };
    for (const auto* list : {&cs.added, &cs.modified}) {
        for (const auto& f : *list) {
            const DepEntry& e = deps.entry(f);
            if (e.kind == FileKind::Media || e.kind == FileKind::Table) {
                put({f}, layout::archive(name, version, e.archive));
            }
        }
    }
    put({kHeaderFile}, layout::header(name, version));
    report.total_bytes_uploaded += upload_deps(backend, name, deps);
    report.uploaded_archives.push_back(layout::deps(name, version).str());

    report.added = cs.added;
    report.modified = cs.modified;
    report.reused = cs.unchanged.size() + cs.carried.size();
    report.deleted = cs.deleted.size();
    return report;
}

RemoveReport remove_media(const std::string& name, const std::vector<std::string>& files, Backend& backend,
                          const Cache* cache) {
    const BackendLock lock(backend, name);
    const auto versions = list_versions(backend, name);
    std::vector<DependencyTable> all;
    for (const auto& v : versions) all.push_back(fetch_deps(backend, name, v));

    for (const auto& f : files) {
        const bool known = std::any_of(all.begin(), all.end(), [&](const DependencyTable& d) {
            const DepEntry* e = d.find(f);
            return e && e->kind == FileKind::Media;
        });
        if (!known) fail(ErrorCode::NotFound, "'" + f + "' is not a media file of any version of '" + name + "'");
    }

    RemoveReport report;
    report.files = files;
    std::set<std::string> targets;  // archives of entries flagged now
    std::vector<bool> changed(all.size(), false);
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (const auto& f : files) {
            const DepEntry* e = all[i].find(f);
            if (!e || e->kind != FileKind::Media || e->removed) continue;
            DepEntry updated = *e;
            targets.insert(layout::archive(name, e->origin_version, e->archive).str());
            updated.removed = true;
            updated.digest = kZeroDigest;
            all[i].upsert(std::move(updated));
            changed[i] = true;
        }
    }
    // An archive shared with a file that stays published must survive.
    for (const auto& d : all) {
        for (const auto& [path, e] : d.entries()) {
            if (e.kind == FileKind::Media && !e.removed) {
                targets.erase(layout::archive(name, e.origin_version, e.archive).str());
            }
        }
    }

    TempDir tmp({}, "audvault-placeholder");
    const fs::path empty = tmp.path() / "empty";
    write_file(empty, "");
    for (const auto& t : targets) {
        backend.put_file(empty, BackendPath(t));
        report.archives_replaced.push_back(t);
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (!changed[i]) continue;
        upload_deps(backend, name, all[i]);
        report.versions_updated.push_back(versions[i]);
    }

    if (cache) {
        for (std::size_t i = 0; i < all.size(); ++i) {
            const fs::path dir = cache->root() / backend.repository().name / name / versions[i];
            std::error_code ec;
            if (!fs::is_directory(dir, ec)) continue;
            for (const auto& flavour_dir : fs::directory_iterator(dir)) {
                if (!flavour_dir.is_directory()) continue;
                const fs::path folder = flavour_dir.path();
                for (const auto& f : files) fs::remove(folder / f, ec);
                if (fs::exists(folder / kDepsFile)) atomic_write(folder / kDepsFile, serialize_deps(all[i]));
                if (fs::exists(folder / kManifestFile)) {
                    auto m = ConversionManifest::load(folder / kManifestFile);
                    for (const auto& f : files) m.erase(f);
                    m.save(folder / kManifestFile);
                }
            }
        }
    }
    return report;
}

}  // namespace audvault
