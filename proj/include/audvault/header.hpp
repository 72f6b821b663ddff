#pragma once

#include "audvault/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace audvault {

/// Constraint on the values of a column.
struct Scheme {
    DType dtype = DType::String;
    std::optional<std::vector<Value>> labels;   // explicit label set
    std::optional<std::string> labels_table;    // misc table whose index values are the labels
    std::optional<double> minimum;
    std::optional<double> maximum;
    std::optional<std::string> description;

    bool is_misc_backed() const { return labels_table.has_value(); }
    friend bool operator==(const Scheme&, const Scheme&) = default;
};

enum class IndexKind { Filewise, Segmented, Misc };

const char* index_kind_name(IndexKind k);

struct IndexLevel {
    std::string name;
    DType dtype = DType::String;
    friend bool operator==(const IndexLevel&, const IndexLevel&) = default;
};

struct ColumnDecl {
    std::string id;
    std::optional<std::string> scheme_id;
    std::optional<std::string> rater_id;
    std::optional<std::string> description;
    friend bool operator==(const ColumnDecl&, const ColumnDecl&) = default;
};

struct TableDecl {
    IndexKind kind = IndexKind::Filewise;
    std::vector<IndexLevel> levels;  // misc tables only; file tables use the fixed levels
    std::vector<ColumnDecl> columns;
    std::optional<std::string> split_id;
    std::optional<std::string> description;

    /// file / file,start,end / the declared misc levels.
    std::vector<IndexLevel> index_levels() const;
    const ColumnDecl* find_column(std::string_view id) const;
    friend bool operator==(const TableDecl&, const TableDecl&) = default;
};

enum class SplitType { Train, Dev, Test, Other };
const char* split_type_name(SplitType t);

struct SplitDecl {
    SplitType type = SplitType::Other;
    std::optional<std::string> description;
    friend bool operator==(const SplitDecl&, const SplitDecl&) = default;
};

struct RaterDecl {
    std::string type = "human";
    std::optional<std::string> description;
    friend bool operator==(const RaterDecl&, const RaterDecl&) = default;
};

/// Dataset identity, metadata, and declarations. Mirrors db.yaml.
struct Header {
    std::string name;
    std::string source;
    std::string usage;
    std::optional<std::string> author;
    std::optional<std::string> description;
    std::optional<Date> expires;
    std::vector<std::string> languages;
    std::optional<std::string> license;
    std::optional<std::string> organisation;
    std::map<std::string, std::string> custom;

    std::map<std::string, Scheme> schemes;
    std::map<std::string, TableDecl> tables;
    std::map<std::string, SplitDecl> splits;
    std::map<std::string, RaterDecl> raters;
    std::map<std::string, std::string> attachments;

    const Scheme* find_scheme(std::string_view id) const;
    const TableDecl& table(std::string_view id) const;  // throws NotFound
    friend bool operator==(const Header&, const Header&) = default;
};

/// Throws ErrorCode::Validation on the first violated invariant.
void validate_header(const Header& h);

/// Parses db.yaml. Unknown top-level scalar keys land in `custom`.
Header parse_header(std::string_view yaml);

/// Deterministic YAML: fixed key order, declaration order for columns.
std::string serialize_header(const Header& h);

}  // namespace audvault
