#include "audvault/table.hpp"

#include "audvault/error.hpp"
#include "audvault/path_util.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace audvault {

Index Index::filewise(std::vector<std::string> files) {
    Index idx;
    idx.kind = IndexKind::Filewise;
    idx.levels = {{"file", DType::String}};
    std::vector<Value> col(files.begin(), files.end());
    idx.columns.push_back(std::move(col));
    return idx;
}

Index Index::segmented(std::vector<std::string> files, std::vector<Duration> starts,
                       std::vector<std::optional<Duration>> ends) {
    if (files.size() != starts.size() || files.size() != ends.size()) {
        fail(ErrorCode::InvalidArgument, "segmented index: level lengths differ");
    }
    Index idx;
    idx.kind = IndexKind::Segmented;
    idx.levels = {{"file", DType::String}, {"start", DType::Time}, {"end", DType::Time}};
    idx.columns.resize(3);
    for (std::size_t i = 0; i < files.size(); ++i) {
        idx.columns[0].emplace_back(std::move(files[i]));
        idx.columns[1].emplace_back(starts[i]);
        idx.columns[2].push_back(ends[i] ? Value{*ends[i]} : Value{});
    }
    return idx;
}

Index Index::empty_like(const Index& other) {
    Index idx;
    idx.kind = other.kind;
    idx.levels = other.levels;
    idx.columns.resize(other.levels.size());
    return idx;
}

const std::string& Index::file(std::size_t row) const {
    return std::get<std::string>(columns.at(0).at(row));
}

Duration Index::start(std::size_t row) const {
    return std::get<Duration>(columns.at(1).at(row));
}

std::optional<Duration> Index::end(std::size_t row) const {
    const Value& v = columns.at(2).at(row);
    if (is_missing(v)) return std::nullopt;
    return std::get<Duration>(v);
}

void Index::push_row(std::vector<Value> row) {
    if (row.size() != levels.size()) {
        fail(ErrorCode::InvalidArgument, "index row has the wrong number of levels");
    }
    columns.resize(levels.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
        columns[i].push_back(std::move(row[i]));
    }
}

std::vector<Value> Index::row(std::size_t i) const {
    std::vector<Value> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back(c.at(i));
    return out;
}

namespace {

std::string row_key(const Index& idx, std::size_t row) {
    std::string key;
    for (const auto& col : idx.columns) {
        key += format_value(col[row]);
        key += '\x1f';
    }
    return key;
}

}  // namespace

void validate_index(const Index& index) {
    if (index.columns.size() != index.levels.size()) {
        fail(ErrorCode::Validation, "index has mismatched level columns");
    }
    const std::size_t n = index.size();
    for (std::size_t l = 0; l < index.levels.size(); ++l) {
        if (index.columns[l].size() != n) {
            fail(ErrorCode::Validation, "index levels have different lengths");
        }
        const bool nullable = index.kind == IndexKind::Segmented && l == 2;
        for (const auto& v : index.columns[l]) {
            if (is_missing(v)) {
                if (!nullable) fail(ErrorCode::Validation, "missing value in index level '" + index.levels[l].name + "'");
            } else if (!holds_dtype(v, index.levels[l].dtype)) {
                fail(ErrorCode::Validation, "index level '" + index.levels[l].name + "' holds a value of the wrong dtype");
            }
        }
    }
    if (index.is_file_based()) {
        for (std::size_t r = 0; r < n; ++r) {
            if (!is_safe_relative_path(index.file(r))) {
                fail(ErrorCode::Validation, "unsafe file path in index: '" + index.file(r) + "'");
            }
            if (index.kind == IndexKind::Segmented) {
                const Duration s = index.start(r);
                if (s.ns < 0) fail(ErrorCode::Validation, "negative segment start for '" + index.file(r) + "'");
                if (auto e = index.end(r); e && *e <= s) {
                    fail(ErrorCode::Validation, "segment end not after start for '" + index.file(r) + "'");
                }
            }
        }
    }
    std::unordered_set<std::string> seen;
    seen.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!seen.insert(row_key(index, r)).second) {
            fail(ErrorCode::Validation, "duplicate index row " + std::to_string(r + 1));
        }
    }
}

std::optional<Violation> validate_value(const Value& v, const Scheme& s, const std::set<Value>* misc_labels) {
    if (is_missing(v)) {
        return std::nullopt;
    }
    if (!holds_dtype(v, s.dtype)) {
        return Violation{"value '" + format_value(v) + "' is not of dtype " + dtype_name(s.dtype)};
    }
    double x = 0;
    if (numeric_value(v, x)) {
        if (s.minimum && x < *s.minimum) {
            return Violation{"value " + format_value(v) + " below minimum"};
        }
        if (s.maximum && x > *s.maximum) {
            return Violation{"value " + format_value(v) + " above maximum"};
        }
    }
    if (s.labels && std::find(s.labels->begin(), s.labels->end(), v) == s.labels->end()) {
        return Violation{"label '" + format_value(v) + "' not in scheme labels"};
    }
    if (s.labels_table) {
        if (!misc_labels) {
            return Violation{"labels of misc table '" + *s.labels_table + "' are not available"};
        }
        if (!misc_labels->contains(v)) {
            return Violation{"label '" + format_value(v) + "' not in index of misc table '" + *s.labels_table + "'"};
        }
    }
    return std::nullopt;
}

SchemeRegistry::SchemeRegistry(const Header& header) : schemes_(header.schemes) {
    for (const auto& [id, s] : schemes_) {
        if (s.labels) labels_[id] = std::set<Value>(s.labels->begin(), s.labels->end());
    }
}

void SchemeRegistry::bind_labels(const std::string& table_id, const Index& misc) {
    if (misc.kind != IndexKind::Misc || misc.columns.empty()) {
        fail(ErrorCode::InvalidArgument, "labels can only be bound from a misc table");
    }
    std::set<Value> labels(misc.columns.front().begin(), misc.columns.front().end());
    for (const auto& [id, s] : schemes_) {
        if (s.labels_table == table_id) labels_[id] = labels;
    }
}

bool SchemeRegistry::labels_bound(const std::string& scheme_id) const {
    const Scheme& s = scheme(scheme_id);
    return !s.labels_table || labels_.contains(scheme_id);
}

const Scheme& SchemeRegistry::scheme(const std::string& scheme_id) const {
    auto it = schemes_.find(scheme_id);
    if (it == schemes_.end()) fail(ErrorCode::Validation, "unknown scheme '" + scheme_id + "'");
    return it->second;
}

DType SchemeRegistry::column_dtype(const ColumnDecl& c) const {
    return c.scheme_id ? scheme(*c.scheme_id).dtype : DType::Object;
}

std::optional<Violation> SchemeRegistry::check(const Value& v, const std::string& scheme_id) const {
    const Scheme& s = scheme(scheme_id);
    if (is_missing(v)) return std::nullopt;
    if (s.labels_table) {
        auto it = labels_.find(scheme_id);
        return validate_value(v, s, it == labels_.end() ? nullptr : &it->second);
    }
    // Explicit labels go through the set instead of the linear scan.
    if (s.labels) {
        Scheme unlabeled = s;
        unlabeled.labels.reset();
        if (auto viol = validate_value(v, unlabeled)) return viol;
        if (!labels_.at(scheme_id).contains(v)) {
            return Violation{"label '" + format_value(v) + "' not in scheme labels"};
        }
        return std::nullopt;
    }
    return validate_value(v, s);
}

Table::Table(std::string id, Index index, std::vector<Column> columns, const SchemeRegistry& schemes,
             std::optional<std::string> split_id)
    : id_(std::move(id)), index_(std::move(index)), columns_(std::move(columns)), split_id_(std::move(split_id)) {
    validate_index(index_);
    std::set<std::string> names;
    for (const auto& l : index_.levels) names.insert(l.name);
    for (const auto& c : columns_) {
        if (!names.insert(c.id).second) {
            fail(ErrorCode::Validation, "table '" + id_ + "': duplicate column '" + c.id + "'");
        }
        if (c.values.size() != index_.size()) {
            fail(ErrorCode::Validation, "table '" + id_ + "' column '" + c.id + "' does not match index length");
        }
        for (std::size_t r = 0; r < c.values.size(); ++r) {
            const Value& v = c.values[r];
            std::optional<Violation> viol;
            if (c.scheme_id) {
                viol = schemes.check(v, *c.scheme_id);
            } else if (!is_missing(v) && !std::holds_alternative<std::string>(v)) {
                viol = Violation{"column without scheme must hold text values"};
            }
            if (viol) {
                fail(ErrorCode::Validation, "table '" + id_ + "' column '" + c.id + "' row " +
                                                std::to_string(r + 1) + ": " + viol->reason);
            }
        }
    }
}

Table Table::trusted(std::string id, Index index, std::vector<Column> columns, std::optional<std::string> split_id) {
    Table t;
    t.id_ = std::move(id);
    t.index_ = std::move(index);
    t.columns_ = std::move(columns);
    t.split_id_ = std::move(split_id);
    return t;
}

const Column* Table::find_column(std::string_view id) const {
    auto it = std::find_if(columns_.begin(), columns_.end(), [&](const Column& c) { return c.id == id; });
    return it == columns_.end() ? nullptr : &*it;
}

const Column& Table::column(std::string_view id) const {
    if (const Column* c = find_column(id)) return *c;
    fail(ErrorCode::NotFound, "table '" + id_ + "' has no column '" + std::string(id) + "'");
}

Table Table::filter_rows(const std::vector<bool>& keep) const {
    if (keep.size() != rows()) {
        fail(ErrorCode::InvalidArgument, "row mask length does not match table");
    }
    Table out = *this;
    for (auto& level : out.index_.columns) level.clear();
    for (auto& c : out.columns_) c.values.clear();
    for (std::size_t r = 0; r < rows(); ++r) {
        if (!keep[r]) continue;
        for (std::size_t l = 0; l < index_.columns.size(); ++l) out.index_.columns[l].push_back(index_.columns[l][r]);
        for (std::size_t c = 0; c < columns_.size(); ++c) out.columns_[c].values.push_back(columns_[c].values[r]);
    }
    return out;
}

std::vector<std::string> Table::files() const {
    std::vector<std::string> out;
    if (!index_.is_file_based()) return out;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < rows(); ++r) {
        if (seen.insert(index_.file(r)).second) out.push_back(index_.file(r));
    }
    return out;
}

namespace {

const std::string& misc_table_for(const Column& col, const Header& header) {
    const Scheme* s = col.scheme_id ? header.find_scheme(*col.scheme_id) : nullptr;
    if (!s || !s->labels_table) {
        fail(ErrorCode::InvalidArgument, "column '" + col.id + "' has no misc-table backed scheme to map through");
    }
    return *s->labels_table;
}

Frame get_impl(const Table& t, const GetOptions& opts, const Header* header,
               const std::map<std::string, Table>* tables) {
    std::vector<const Column*> selected;
    if (opts.column) {
        selected.push_back(&t.column(*opts.column));
    } else {
        for (const auto& c : t.columns()) selected.push_back(&c);
    }

    // Row mapping from target index rows to source rows.
    Frame frame;
    std::vector<std::size_t> source_rows;
    if (!opts.index) {
        frame.index = t.index();
        source_rows.resize(t.rows());
        for (std::size_t r = 0; r < t.rows(); ++r) source_rows[r] = r;
    } else {
        const Index& target = *opts.index;
        if (!target.is_file_based()) {
            fail(ErrorCode::InvalidArgument, "target index must be filewise or segmented");
        }
        const IndexKind src = t.index().kind;
        if (src == IndexKind::Misc) {
            fail(ErrorCode::InvalidArgument, "misc table '" + t.id() + "' cannot be re-indexed onto files");
        }
        if (src == IndexKind::Segmented && target.kind == IndexKind::Filewise) {
            fail(ErrorCode::InvalidArgument, "segmented table '" + t.id() + "' cannot be re-indexed onto a filewise index");
        }
        std::unordered_map<std::string, std::size_t> lookup;
        lookup.reserve(t.rows());
        auto key_of = [&](const Index& idx, std::size_t r) {
            if (src == IndexKind::Filewise) return idx.file(r);
            std::string k = idx.file(r);
            for (std::size_t l = 1; l < 3; ++l) {
                k += '\x1f';
                k += format_value(idx.columns[l][r]);
            }
            return k;
        };
        for (std::size_t r = 0; r < t.rows(); ++r) lookup.emplace(key_of(t.index(), r), r);
        frame.index = Index::empty_like(target);
        for (std::size_t r = 0; r < target.size(); ++r) {
            auto it = lookup.find(key_of(target, r));
            if (it == lookup.end()) continue;
            frame.index.push_row(target.row(r));
            source_rows.push_back(it->second);
        }
    }

    for (const Column* col : selected) {
        std::vector<Value> values;
        values.reserve(source_rows.size());
        for (std::size_t r : source_rows) values.push_back(col->values[r]);
        frame.column_ids.push_back(col->id);
        frame.columns.push_back(std::move(values));
    }

    if (opts.map) {
        if (!header || !tables) {
            fail(ErrorCode::InvalidArgument, "label mapping requires the dataset header and tables");
        }
        if (selected.size() != 1) {
            fail(ErrorCode::InvalidArgument, "label mapping requires exactly one source column");
        }
        const std::string& misc_id = misc_table_for(*selected.front(), *header);
        auto mt = tables->find(misc_id);
        if (mt == tables->end()) {
            fail(ErrorCode::NotFound, "misc table '" + misc_id + "' is not loaded");
        }
        const Table& misc = mt->second;
        const Column* target_col = misc.find_column(*opts.map);
        if (!target_col) {
            fail(ErrorCode::InvalidArgument, "misc table '" + misc_id + "' has no column '" + *opts.map + "'");
        }
        std::map<Value, std::size_t> by_label;
        for (std::size_t r = 0; r < misc.rows(); ++r) by_label.emplace(misc.index().columns.front()[r], r);
        for (auto& v : frame.columns.front()) {
            auto it = by_label.find(v);
            v = it == by_label.end() ? Value{} : target_col->values[it->second];
        }
        frame.column_ids.front() = *opts.map;
    }
    return frame;
}

}  // namespace

Frame table_get(const Table& t, const GetOptions& opts, const Header& header,
                const std::map<std::string, Table>& tables) {
    return get_impl(t, opts, &header, &tables);
}

Frame table_get(const Table& t, const GetOptions& opts) {
    return get_impl(t, opts, nullptr, nullptr);
}

}  // namespace audvault
