#include "audvault/loader.hpp"

#include "audvault/digest.hpp"
#include "audvault/error.hpp"
#include "audvault/log.hpp"
#include "audvault/tempdir.hpp"
#include "audvault/version.hpp"
#include "audvault/zip.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace audvault {

namespace fs = std::filesystem;

const Table& LoadedDataset::operator[](const std::string& id) const {
    auto it = tables.find(id);
    if (it == tables.end()) fail(ErrorCode::NotFound, "table '" + id + "' is not loaded");
    return it->second;
}

Frame LoadedDataset::get(const std::string& table_id, const GetOptions& opts) const {
    return table_get((*this)[table_id], opts, header, tables);
}

std::vector<std::string> LoadedDataset::media() const {
    std::set<std::string> out;
    const std::set<std::string> removed(removed_media.begin(), removed_media.end());
    for (const auto& [id, t] : tables) {
        for (auto& f : t.files()) {
            if (!removed.contains(f)) out.insert(std::move(f));
        }
    }
    return {out.begin(), out.end()};
}

bool matches_pattern(const std::string& pattern, const std::string& value) {
    if (pattern == value) return true;
    if (pattern.find_first_of("*?[") == std::string::npos) return false;
    return ::fnmatch(pattern.c_str(), value.c_str(), 0) == 0;
}

namespace {

// Downloads a single-file archive into `dir` and returns the extracted file.
// The member name is not trusted to match the dataset path: archives are
// content addressed and may be shared by files with identical content.
fs::path fetch_single(Backend& backend, const BackendPath& remote, const fs::path& dir) {
    fs::create_directories(dir);
    const auto members = fetch_archive(backend, remote, dir);
    if (members.size() != 1) {
        fail(ErrorCode::Corrupt, "archive '" + remote.str() + "' holds " + std::to_string(members.size()) +
                                     " members, expected 1");
    }
    return dir / members.front();
}

void move_into(const fs::path& from, const fs::path& to) {
    fs::create_directories(to.parent_path());
    fs::rename(from, to);
}

Header fetch_header(Backend& backend, const std::string& name, const std::string& version) {
    TempDir tmp({}, "audvault-header");
    const fs::path file = fetch_single(backend, layout::header(name, version), tmp.path());
    return parse_header(read_file(file));
}

std::set<std::string> select_tables(const Header& header, const std::optional<std::vector<std::string>>& patterns) {
    std::set<std::string> chosen;
    for (const auto& [id, decl] : header.tables) {
        if (!patterns || decl.kind == IndexKind::Misc) chosen.insert(id);
    }
    if (patterns) {
        for (const auto& p : *patterns) {
            bool any = false;
            for (const auto& [id, decl] : header.tables) {
                if (matches_pattern(p, id)) {
                    chosen.insert(id);
                    any = true;
                }
            }
            if (!any) fail(ErrorCode::NotFound, "no table matches '" + p + "'");
        }
    }
    return chosen;
}

struct Resolved {
    std::string repository;
    std::string version;
    std::shared_ptr<Backend> backend;  // null when the version was found in the cache
};

Resolved resolve(const LoadRequest& req, const Backends& backends, const Cache& cache, const std::string& fid) {
    if (backends.empty()) fail(ErrorCode::InvalidArgument, "no repositories configured");
    if (req.version) {
        if (!is_valid_version(*req.version)) fail(ErrorCode::InvalidArgument, "invalid version '" + *req.version + "'");
        for (const auto& b : backends) {
            const CacheKey key{b->repository().name, req.name, *req.version, fid};
            std::error_code ec;
            if (fs::is_regular_file(cache.folder(key) / kDepsFile, ec) &&
                fs::is_regular_file(cache.folder(key) / kHeaderFile, ec)) {
                return {key.repository, key.version, nullptr};
            }
        }
        auto b = resolve_repository(req.name, req.version, backends);
        return {b->repository().name, *req.version, b};
    }
    try {
        auto b = resolve_repository(req.name, std::nullopt, backends);
        return {b->repository().name, list_versions(*b, req.name).back(), b};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Io) throw;
        std::optional<Resolved> best;
        for (const auto& b : backends) {
            const auto versions = cache.cached_versions(b->repository().name, req.name, fid);
            if (versions.empty()) continue;
            if (!best || compare_versions(best->version, versions.back()) < 0) {
                best = Resolved{b->repository().name, versions.back(), nullptr};
            }
        }
        if (!best) throw;
        warn(std::string(e.what()) + "; using cached version " + best->version);
        return *best;
    }
}

class Materializer {
public:
    Materializer(const LoadRequest& req, const Backends& backends, const LoadOptions& opts, const Cache& cache,
                 CacheKey key, std::shared_ptr<Backend> backend)
        : req_(req), backends_(backends), opts_(opts), cache_(cache), key_(std::move(key)),
          backend_(std::move(backend)), folder_(cache_.folder(key_)) {}

    // Builds the dataset from the key folder. Without the lock nothing is
    // written except table snapshots, and a missing piece yields nullopt.
    std::optional<LoadedDataset> run(bool locked) {
        if (locked) fs::create_directories(folder_);
        auto deps = cache_.cached_deps(key_);
        if (!deps) {
            if (!locked) return std::nullopt;
            TempDir work(folder_, ".work");
            move_into(fetch_single(backend(), layout::deps(req_.name, key_.version), work.path()), folder_ / kDepsFile);
            deps = cache_.cached_deps(key_);
            if (!deps) fail(ErrorCode::Corrupt, "unreadable dependency table for version " + key_.version);
        }

        const fs::path header_file = folder_ / kHeaderFile;
        if (!header_valid(*deps)) {
            if (!locked) return std::nullopt;
            TempDir work(folder_, ".work");
            move_into(fetch_single(backend(), layout::header(req_.name, key_.version), work.path()), header_file);
            if (!header_valid(*deps)) fail(ErrorCode::Corrupt, "header digest mismatch for version " + key_.version);
        }
        Header header = parse_header(read_file(header_file));

        const auto selected = select_tables(header, req_.tables);
        for (const auto& id : selected) {
            const std::string file = table_file_name(id);
            if (!deps->find(file)) fail(ErrorCode::Corrupt, "table '" + id + "' is missing from the dependency table");
            if (cache_.lookup(key_, file, *deps)) continue;
            if (!locked) return std::nullopt;
            fetch_plain(file, *deps);
        }

        SchemeRegistry registry(header);
        std::map<std::string, Table> tables;
        for (const auto& id : table_load_order(header)) {
            if (!selected.contains(id)) continue;
            const TableDecl& decl = header.table(id);
            Table t = cache_.load_table(key_, id, decl, registry, *deps);
            if (decl.kind == IndexKind::Misc) registry.bind_labels(id, t.index());
            tables.emplace(id, std::move(t));
        }

        std::set<std::string> referenced;
        for (const auto& [id, t] : tables) {
            for (auto& f : t.files()) referenced.insert(std::move(f));
        }
        if (req_.media) {
            auto wanted = [&](const std::string& f) {
                return std::any_of(req_.media->begin(), req_.media->end(),
                                   [&](const std::string& p) { return matches_pattern(p, f); });
            };
            std::erase_if(referenced, [&](const std::string& f) { return !wanted(f); });
            for (auto& [id, t] : tables) {
                if (!t.index().is_file_based()) continue;
                std::vector<bool> keep(t.rows());
                for (std::size_t i = 0; i < t.rows(); ++i) keep[i] = referenced.contains(t.index().file(i));
                t = t.filter_rows(keep);
            }
            if (referenced.empty()) warn("media filter matches no files of " + req_.name + " " + key_.version);
        }

        LoadedDataset ds;
        std::vector<std::string> needed;
        for (const auto& f : referenced) {
            const DepEntry* e = deps->find(f);
            if (!e) fail(ErrorCode::Corrupt, "'" + f + "' is referenced by a table but missing from the dependency table");
            if (e->removed) {
                ds.removed_media.push_back(f);
            } else {
                needed.push_back(f);
            }
        }

        if (!req_.only_metadata) {
            for (const auto& f : deps->removed_media()) {
                std::error_code ec;
                if (!fs::exists(folder_ / f, ec)) continue;
                if (!locked) return std::nullopt;
                fs::remove(folder_ / f);
            }
            ConversionManifest manifest;
            if (!raw()) manifest = ConversionManifest::load(folder_ / kManifestFile);
            std::vector<std::string> missing;
            for (const auto& f : needed) {
                if (!cache_.lookup(key_, f, *deps, &manifest)) missing.push_back(f);
            }
            if (!missing.empty()) {
                if (!locked) return std::nullopt;
                fetch_media(missing, *deps, manifest);
            }
        }

        if (locked) atomic_write(folder_ / kCompleteMarker, key_.version + "\n");
        ds.key = key_;
        ds.header = std::move(header);
        ds.tables = std::move(tables);
        ds.root = folder_;
        ds.deps = std::move(*deps);
        return ds;
    }

private:
    bool raw() const { return key_.flavour_id == "raw"; }

    Backend& backend() {
        if (!backend_) {
            for (const auto& b : backends_) {
                if (b->repository().name == key_.repository) {
                    backend_ = b;
                    break;
                }
            }
            if (!backend_) fail(ErrorCode::NotFound, "repository '" + key_.repository + "' is not configured");
        }
        return *backend_;
    }

    bool header_valid(const DependencyTable& deps) const {
        const fs::path file = folder_ / kHeaderFile;
        std::error_code ec;
        if (!fs::is_regular_file(file, ec)) return false;
        const DepEntry* e = deps.find(kHeaderFile);
        return !e || file_digest(file) == e->digest;
    }

    std::vector<std::pair<CacheKey, DependencyTable>> sibling_deps() const {
        std::vector<std::pair<CacheKey, DependencyTable>> out;
        auto versions = cache_.cached_versions(key_.repository, key_.name, key_.flavour_id);
        for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
            if (*it == key_.version) continue;
            CacheKey other = key_;
            other.version = *it;
            if (auto d = cache_.cached_deps(other)) out.emplace_back(std::move(other), std::move(*d));
        }
        return out;
    }

    // Tables: copy from a sibling version or download, no conversion.
    void fetch_plain(const std::string& file, const DependencyTable& deps) {
        const DepEntry& e = deps.entry(file);
        for (const auto& [other, odeps] : sibling_deps()) {
            const DepEntry* oe = odeps.find(file);
            if (!oe || oe->digest != e.digest) continue;
            if (auto src = cache_.lookup(other, file, odeps)) {
                cache_.store(key_, file, *src);
                return;
            }
        }
        TempDir work(folder_, ".work");
        const fs::path got = fetch_single(backend(), layout::archive(req_.name, e.origin_version, e.archive), work.path());
        if (file_digest(got) != e.digest) fail(ErrorCode::Corrupt, "digest mismatch for '" + file + "' after download");
        move_into(got, folder_ / file);
    }

    void fetch_media(const std::vector<std::string>& missing, const DependencyTable& deps,
                     ConversionManifest& manifest) {
        struct Sibling {
            CacheKey key;
            DependencyTable deps;
            ConversionManifest manifest;
        };
        std::vector<Sibling> siblings;
        for (auto& [k, d] : sibling_deps()) {
            ConversionManifest m;
            if (!raw()) m = ConversionManifest::load(cache_.folder(k) / kManifestFile);
            siblings.push_back({k, std::move(d), std::move(m)});
        }

        TempDir work(folder_, ".work");
        std::mutex mtx;
        std::atomic<std::size_t> next{0};
        std::atomic<bool> abort{false};
        std::exception_ptr error;

        auto one = [&](std::size_t i) {
            const std::string& path = missing[i];
            const DepEntry& e = deps.entry(path);
            for (const auto& s : siblings) {
                const DepEntry* se = s.deps.find(path);
                if (!se || se->removed || se->digest != e.digest) continue;
                auto src = cache_.lookup(s.key, path, s.deps, &s.manifest);
                if (!src) continue;
                cache_.store(key_, path, *src);
                if (!raw()) {
                    std::lock_guard lk(mtx);
                    manifest.set(path, *s.manifest.find(path));
                }
                return;
            }
            const fs::path dir = work.path() / std::to_string(i);
            const fs::path got =
                fetch_single(*backend_, layout::archive(req_.name, e.origin_version, e.archive), dir);
            if (file_digest(got) != e.digest) fail(ErrorCode::Corrupt, "digest mismatch for '" + path + "' after download");
            if (raw()) {
                move_into(got, folder_ / path);
                return;
            }
            const fs::path out = dir / ".converted";
            convert(got, req_.flavour, out);
            const std::string out_digest = file_digest(out);
            move_into(out, folder_ / path);
            std::lock_guard lk(mtx);
            manifest.set(path, {e.digest, out_digest});
        };

        backend();  // resolve before the workers start
        const std::size_t n_workers =
            std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts_.workers, 1)), 1, missing.size());
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < n_workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t i; !abort && (i = next++) < missing.size();) {
                        try {
                            one(i);
                        } catch (...) {
                            std::lock_guard lk(mtx);
                            if (!error) error = std::current_exception();
                            abort = true;
                        }
                    }
                });
            }
        }
        if (!raw()) manifest.save(folder_ / kManifestFile);
        if (error) std::rethrow_exception(error);
    }

    const LoadRequest& req_;
    const Backends& backends_;
    const LoadOptions& opts_;
    const Cache& cache_;
    CacheKey key_;
    std::shared_ptr<Backend> backend_;
    fs::path folder_;
};

}  // namespace

std::string latest_version(const std::string& name, const Backends& backends) {
    auto b = resolve_repository(name, std::nullopt, backends);
    return list_versions(*b, name).back();
}

LoadedDataset load(const LoadRequest& req, const Backends& backends, const LoadOptions& opts) {
    validate_flavour(req.flavour);
    const Cache cache(opts.cache_root, opts.link_mode);
    const std::string fid = flavour_id(req.flavour);
    Resolved r = resolve(req, backends, cache, fid);
    CacheKey key{r.repository, req.name, r.version, fid};
    Materializer m(req, backends, opts, cache, key, r.backend);
    if (auto ds = m.run(false)) return std::move(*ds);
    const CacheLock lock = cache.lock(key, opts.lock_timeout);
    return std::move(*m.run(true));
}

fs::path load_to(const fs::path& root, const std::string& name, const std::string& version, const Backends& backends) {
    auto b = resolve_repository(name, version, backends);
    fs::create_directories(root);
    TempDir work(root, ".fetch");
    const auto deps =
        parse_deps(read_file(fetch_single(*b, layout::deps(name, version), work.path() / "deps")), version);
    move_into(fetch_single(*b, layout::header(name, version), work.path() / "header"), root / kHeaderFile);
    std::size_t i = 0;
    for (const auto& [path, e] : deps.entries()) {
        if (e.removed || (e.kind != FileKind::Media && e.kind != FileKind::Table)) continue;
        const fs::path got =
            fetch_single(*b, layout::archive(name, e.origin_version, e.archive), work.path() / std::to_string(i++));
        if (file_digest(got) != e.digest) fail(ErrorCode::Corrupt, "digest mismatch for '" + path + "' after download");
        move_into(got, root / path);
    }
    return root;
}

std::vector<AvailableRow> available(const Backends& backends, bool only_latest) {
    std::vector<AvailableRow> rows;
    std::set<std::string> seen;
    for (const auto& b : backends) {
        try {
            for (const auto& name : list_datasets(*b)) {
                if (only_latest && seen.contains(name)) continue;
                auto versions = list_versions(*b, name);
                if (versions.empty()) continue;
                if (only_latest) versions.erase(versions.begin(), versions.end() - 1);
                for (const auto& v : versions) {
                    const Header h = fetch_header(*b, name, v);
                    rows.push_back({name, v, b->repository().name, h.source, h.usage, h.license, h.languages});
                }
                seen.insert(name);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Io) throw;
            warn("skipping repository '" + b->repository().name + "': " + e.what());
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const AvailableRow& a, const AvailableRow& b) {
        if (a.name != b.name) return a.name < b.name;
        return compare_versions(a.version, b.version) < 0;
    });
    return rows;
}

Header info_header(const std::string& name, const std::optional<std::string>& version, const Backends& backends) {
    auto b = resolve_repository(name, version, backends);
    return fetch_header(*b, name, version ? *version : list_versions(*b, name).back());
}

std::vector<std::string> info_schemes(const std::string& name, const std::optional<std::string>& version,
                                      const Backends& backends) {
    std::vector<std::string> ids;
    for (const auto& [id, s] : info_header(name, version, backends).schemes) ids.push_back(id);
    return ids;
}

DependencyTable info_deps(const std::string& name, const std::optional<std::string>& version,
                          const Backends& backends) {
    auto b = resolve_repository(name, version, backends);
    const std::string v = version ? *version : list_versions(*b, name).back();
    TempDir tmp({}, "audvault-deps");
    return parse_deps(read_file(fetch_single(*b, layout::deps(name, v), tmp.path())), v);
}

std::vector<std::string> search_by_scheme(const std::string& scheme_id, const Backends& backends) {
    std::set<std::string> names;
    for (const auto& b : backends) {
        try {
            for (const auto& name : list_datasets(*b)) {
                const auto versions = list_versions(*b, name);
                if (versions.empty()) continue;
                if (fetch_header(*b, name, versions.back()).schemes.contains(scheme_id)) names.insert(name);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Io) throw;
            warn("skipping repository '" + b->repository().name + "': " + e.what());
        }
    }
    return {names.begin(), names.end()};
}

}  // namespace audvault
