#pragma once

#include "audvault/header.hpp"
#include "audvault/table.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace audvault {

/// A header together with its parsed tables.
struct Database {
    Header header;
    std::map<std::string, Table> tables;

    const Table& table(const std::string& id) const;  // throws NotFound
    const Table& operator[](const std::string& id) const { return table(id); }

    /// table_get with access to this database's misc tables for mapping.
    Frame get(const std::string& table_id, const GetOptions& opts = {}) const;

    /// Media files referenced by the index of any filewise/segmented table, sorted.
    std::vector<std::string> referenced_files() const;
};

/// Table ids ordered so every misc table backing a scheme comes before the
/// tables whose columns use that scheme. Throws Validation on cycles.
std::vector<std::string> table_load_order(const Header& header);

/// Parses the selected tables (all when `ids` is empty) in dependency order.
/// `read_table(id)` returns the CSV text of db.<id>.csv. Misc tables backing
/// a scheme of a selected table are added automatically.
Database parse_database(Header header, const std::function<std::string(const std::string&)>& read_table,
                        const std::vector<std::string>& ids = {});

/// Reads db.yaml and every db.<id>.csv from a dataset folder.
Database load_database(const std::filesystem::path& root);

std::string table_file_name(const std::string& table_id);  // "db.<id>.csv"
inline constexpr const char* kHeaderFile = "db.yaml";

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

}  // namespace audvault
