#include "audvault/dependency.hpp"

#include "audvault/csv.hpp"
#include "audvault/database.hpp"
#include "audvault/digest.hpp"
#include "audvault/error.hpp"
#include "audvault/header.hpp"
#include "audvault/version.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace audvault {

namespace fs = std::filesystem;

const char* file_kind_name(FileKind k) {
    switch (k) {
    case FileKind::Media: return "media";
    case FileKind::Table: return "table";
    case FileKind::Header: return "header";
    case FileKind::Attachment: return "attachment";
    }
    return "media";
}

FileKind parse_file_kind(std::string_view s) {
    if (s == "media") return FileKind::Media;
    if (s == "table") return FileKind::Table;
    if (s == "header") return FileKind::Header;
    if (s == "attachment") return FileKind::Attachment;
    fail(ErrorCode::Corrupt, "unknown dependency kind '" + std::string(s) + "'");
}

std::string media_archive_id(const std::string& digest) {
    return "media/" + digest.substr(0, 2) + "/" + digest;
}

std::string table_archive_id(const std::string& table_id) { return "meta/" + table_id; }

std::optional<std::string> table_id_from_file(std::string_view path) {
    if (path.find('/') != std::string_view::npos || path.size() <= 7 || !path.starts_with("db.") ||
        !path.ends_with(".csv")) {
        return std::nullopt;
    }
    return std::string(path.substr(3, path.size() - 7));
}

DependencyTable::DependencyTable(std::string dataset_version, std::vector<DepEntry> entries)
    : version_(std::move(dataset_version)) {
    for (auto& e : entries) upsert(std::move(e));
}

const DepEntry* DependencyTable::find(std::string_view path) const {
    auto it = entries_.find(std::string(path));
    return it == entries_.end() ? nullptr : &it->second;
}

const DepEntry& DependencyTable::entry(std::string_view path) const {
    if (const DepEntry* e = find(path)) return *e;
    fail(ErrorCode::NotFound, "'" + std::string(path) + "' not in dependency table of version " + version_);
}

void DependencyTable::upsert(DepEntry e) {
    if (compare_versions(e.origin_version, version_) > 0) {
        fail(ErrorCode::Validation, "origin version " + e.origin_version + " of '" + e.file +
                                        "' is newer than dataset version " + version_);
    }
    std::string key = e.file;
    entries_.insert_or_assign(std::move(key), std::move(e));
}

void DependencyTable::erase(std::string_view path) { entries_.erase(std::string(path)); }

std::vector<std::string> DependencyTable::media() const {
    std::vector<std::string> out;
    for (const auto& [p, e] : entries_) {
        if (e.kind == FileKind::Media && !e.removed) out.push_back(p);
    }
    return out;
}

std::vector<std::string> DependencyTable::removed_media() const {
    std::vector<std::string> out;
    for (const auto& [p, e] : entries_) {
        if (e.kind == FileKind::Media && e.removed) out.push_back(p);
    }
    return out;
}

std::vector<std::string> DependencyTable::tables() const {
    std::vector<std::string> out;
    for (const auto& [p, e] : entries_) {
        if (e.kind == FileKind::Table) {
            if (auto id = table_id_from_file(p)) out.push_back(*id);
        }
    }
    return out;
}

const std::string& DependencyTable::origin_version(std::string_view path) const { return entry(path).origin_version; }

int DependencyTable::sampling_rate(std::string_view path) const {
    const DepEntry& e = entry(path);
    if (!e.sampling_rate) fail(ErrorCode::NotFound, "'" + std::string(path) + "' has no sampling rate");
    return *e.sampling_rate;
}

bool DependencyTable::is_removed(std::string_view path) const { return entry(path).removed; }

namespace {

constexpr const char* kDepsColumns =
    "file,kind,archive,digest,origin_version,removed,bit_depth,channels,sampling_rate,duration,format";

void append_opt(std::string& out, const std::optional<int>& v) {
    out += ',';
    if (v) out += std::to_string(*v);
}

std::optional<int> parse_opt_int(const csv::Cell& c, std::size_t line) {
    if (c.text.empty()) return std::nullopt;
    int v = 0;
    auto [p, ec] = std::from_chars(c.text.data(), c.text.data() + c.text.size(), v);
    if (ec != std::errc{} || p != c.text.data() + c.text.size()) {
        fail(ErrorCode::Corrupt, "dependency table line " + std::to_string(line) + ": bad integer '" + c.text + "'");
    }
    return v;
}

}  // namespace

std::string serialize_deps(const DependencyTable& d) {
    std::string out = kDepsColumns;
    out += '\n';
    for (const auto& [path, e] : d.entries()) {
        csv::append_field(out, e.file);
        out += ',';
        out += file_kind_name(e.kind);
        out += ',';
        csv::append_field(out, e.archive);
        out += ',';
        out += e.digest;
        out += ',';
        csv::append_field(out, e.origin_version);
        out += ',';
        out += e.removed ? '1' : '0';
        append_opt(out, e.bit_depth);
        append_opt(out, e.channels);
        append_opt(out, e.sampling_rate);
        out += ',';
        if (e.duration) out += format_duration(*e.duration);
        out += ',';
        csv::append_field(out, e.format);
        out += '\n';
    }
    return out;
}

DependencyTable parse_deps(std::string_view text, const std::string& dataset_version) {
    csv::Reader reader(text);
    std::vector<csv::Cell> rec;
    if (!reader.next(rec)) fail(ErrorCode::Corrupt, "empty dependency table");
    std::string head;
    for (const auto& c : rec) head += (head.empty() ? "" : ",") + c.text;
    if (head != kDepsColumns) fail(ErrorCode::Corrupt, "unexpected dependency table columns: " + head);

    DependencyTable d(dataset_version);
    while (reader.next(rec)) {
        const std::size_t line = reader.line();
        if (rec.size() == 1 && rec[0].text.empty()) continue;
        if (rec.size() != 11) fail(ErrorCode::Corrupt, "dependency table line " + std::to_string(line) + ": expected 11 fields");
        DepEntry e;
        e.file = rec[0].text;
        e.kind = parse_file_kind(rec[1].text);
        e.archive = rec[2].text;
        e.digest = rec[3].text;
        e.origin_version = rec[4].text;
        if (rec[5].text != "0" && rec[5].text != "1") {
            fail(ErrorCode::Corrupt, "dependency table line " + std::to_string(line) + ": bad removed flag");
        }
        e.removed = rec[5].text == "1";
        e.bit_depth = parse_opt_int(rec[6], line);
        e.channels = parse_opt_int(rec[7], line);
        e.sampling_rate = parse_opt_int(rec[8], line);
        if (!rec[9].text.empty()) {
            try {
                e.duration = parse_duration(rec[9].text);
            } catch (const Error&) {
                fail(ErrorCode::Corrupt, "dependency table line " + std::to_string(line) + ": bad duration");
            }
        }
        e.format = rec[10].text;
        if (e.digest.size() != 32) fail(ErrorCode::Corrupt, "dependency table line " + std::to_string(line) + ": bad digest");
        if (d.contains(e.file)) fail(ErrorCode::Corrupt, "duplicate dependency entry '" + e.file + "'");
        d.upsert(std::move(e));
    }
    return d;
}

std::map<std::string, FileKind> list_dataset_files(const fs::path& root) {
    const Header header = parse_header(read_file(root / kHeaderFile));
    std::set<std::string> attachments;
    for (const auto& [id, p] : header.attachments) attachments.insert(p);

    std::map<std::string, FileKind> out;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
        const std::string name = it->path().filename().string();
        if (!name.empty() && name.front() == '.') {
            if (it->is_directory()) it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        const std::string rel = fs::relative(it->path(), root).generic_string();
        bool under_attachment = false;
        for (const auto& a : attachments) {
            under_attachment = under_attachment || rel == a || rel.starts_with(a + "/");
        }
        if (under_attachment) continue;
        if (rel == kHeaderFile) {
            out.emplace(rel, FileKind::Header);
        } else if (auto id = table_id_from_file(rel)) {
            out.emplace(rel, FileKind::Table);
        } else if (rel == kDepsFile) {
            continue;
        } else {
            out.emplace(rel, FileKind::Media);
        }
    }
    return out;
}

ChangeSet diff(const fs::path& root, const DependencyTable* previous) {
    if (!fs::exists(root / kHeaderFile)) {
        fail(ErrorCode::InvalidArgument, "'" + root.string() + "' has no " + kHeaderFile);
    }
    ChangeSet cs;
    cs.kinds = list_dataset_files(root);
    for (const auto& [path, kind] : cs.kinds) {
        const std::string digest = file_digest(root / path);
        cs.digests.emplace(path, digest);
        const DepEntry* prev = previous ? previous->find(path) : nullptr;
        if (!prev) {
            cs.added.push_back(path);
        } else if (!prev->removed && prev->digest == digest) {
            cs.unchanged.push_back(path);
        } else {
            cs.modified.push_back(path);
        }
    }
    if (previous) {
        for (const auto& [path, e] : previous->entries()) {
            if (!e.removed && !cs.kinds.contains(path)) cs.deleted.push_back(path);
        }
    }
    return cs;
}

DependencyTable apply(const DependencyTable* previous, const ChangeSet& cs, const std::string& new_version,
                      const std::map<std::string, MediaInfo>& media_meta) {
    DependencyTable out(new_version);
    std::set<std::string> present;
    auto copy_previous = [&](const std::string& path) {
        if (!previous || !previous->contains(path)) {
            fail(ErrorCode::InvalidArgument, "'" + path + "' is not in the previous dependency table");
        }
        out.upsert(previous->entry(path));
        present.insert(path);
    };
    for (const auto& p : cs.unchanged) copy_previous(p);
    for (const auto& p : cs.carried) copy_previous(p);

    auto fresh = [&](const std::string& path) {
        DepEntry e;
        e.file = path;
        e.kind = cs.kinds.at(path);
        e.digest = cs.digests.at(path);
        e.origin_version = new_version;
        switch (e.kind) {
        case FileKind::Media: {
            e.archive = media_archive_id(e.digest);
            auto m = media_meta.find(path);
            if (m == media_meta.end()) fail(ErrorCode::InvalidArgument, "no media metadata for '" + path + "'");
            e.bit_depth = m->second.bit_depth;
            e.channels = m->second.channels;
            e.sampling_rate = m->second.sampling_rate;
            e.duration = m->second.duration;
            const auto dot = path.rfind('.');
            e.format = dot == std::string::npos ? "" : path.substr(dot + 1);
            std::transform(e.format.begin(), e.format.end(), e.format.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            break;
        }
        case FileKind::Table:
            e.archive = table_archive_id(*table_id_from_file(path));
            e.format = "csv";
            break;
        case FileKind::Header:
            e.archive = kHeaderArchiveId;
            e.format = "yaml";
            break;
        case FileKind::Attachment:
            e.archive = "attachment/" + path;
            break;
        }
        out.upsert(std::move(e));
        present.insert(path);
    };
    for (const auto& p : cs.added) fresh(p);
    for (const auto& p : cs.modified) fresh(p);

    if (previous) {
        for (const auto& [path, e] : previous->entries()) {
            if (e.removed && !present.contains(path)) out.upsert(e);
        }
    }
    return out;
}

}  // namespace audvault
