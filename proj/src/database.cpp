#include "audvault/database.hpp"

#include "audvault/csv.hpp"
#include "audvault/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace audvault {

namespace fs = std::filesystem;

std::string table_file_name(const std::string& table_id) { return "db." + table_id + ".csv"; }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot open '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) fail(ErrorCode::Io, "read error on '" + p.string() + "'");
    return std::move(ss).str();
}

void write_file(const fs::path& p, std::string_view content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + p.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::Io, "write error on '" + p.string() + "'");
}

const Table& Database::table(const std::string& id) const {
    auto it = tables.find(id);
    if (it == tables.end()) fail(ErrorCode::NotFound, "table '" + id + "' not loaded");
    return it->second;
}

Frame Database::get(const std::string& table_id, const GetOptions& opts) const {
    return table_get(table(table_id), opts, header, tables);
}

std::vector<std::string> Database::referenced_files() const {
    std::set<std::string> files;
    for (const auto& [id, t] : tables) {
        for (auto& f : t.files()) files.insert(std::move(f));
    }
    return {files.begin(), files.end()};
}

namespace {

// Misc tables a table depends on through misc-backed schemes of its columns.
std::set<std::string> dependencies(const Header& h, const TableDecl& decl) {
    std::set<std::string> deps;
    for (const auto& c : decl.columns) {
        if (!c.scheme_id) continue;
        if (const Scheme* s = h.find_scheme(*c.scheme_id); s && s->labels_table) deps.insert(*s->labels_table);
    }
    return deps;
}

}  // namespace

std::vector<std::string> table_load_order(const Header& header) {
    std::vector<std::string> order;
    std::set<std::string> done;
    while (done.size() < header.tables.size()) {
        bool progress = false;
        for (const auto& [id, decl] : header.tables) {
            if (done.contains(id)) continue;
            bool ready = true;
            for (const auto& d : dependencies(header, decl)) ready = ready && (done.contains(d) || d == id);
            if (!ready) continue;
            order.push_back(id);
            done.insert(id);
            progress = true;
        }
        if (!progress) fail(ErrorCode::Validation, "cyclic scheme references between misc tables");
    }
    return order;
}

Database parse_database(Header header, const std::function<std::string(const std::string&)>& read_table,
                        const std::vector<std::string>& ids) {
    std::set<std::string> wanted;
    if (ids.empty()) {
        for (const auto& [id, _] : header.tables) wanted.insert(id);
    } else {
        std::vector<std::string> stack(ids.begin(), ids.end());
        while (!stack.empty()) {
            const std::string id = stack.back();
            stack.pop_back();
            if (!wanted.insert(id).second) continue;
            for (const auto& d : dependencies(header, header.table(id))) stack.push_back(d);
        }
    }

    SchemeRegistry registry(header);
    Database db;
    for (const auto& id : table_load_order(header)) {
        if (!wanted.contains(id)) continue;
        const TableDecl& decl = header.table(id);
        Table t = parse_table_csv(read_table(id), id, decl, registry);
        if (decl.kind == IndexKind::Misc) registry.bind_labels(id, t.index());
        db.tables.emplace(id, std::move(t));
    }
    db.header = std::move(header);
    return db;
}

Database load_database(const fs::path& root) {
    Header header = parse_header(read_file(root / kHeaderFile));
    return parse_database(std::move(header),
                          [&](const std::string& id) { return read_file(root / table_file_name(id)); });
}

}  // namespace audvault
