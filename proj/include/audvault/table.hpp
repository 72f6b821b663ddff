#pragma once

#include "audvault/header.hpp"
#include "audvault/value.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace audvault {

/// Row labels of a table. Filewise: (file). Segmented: (file, start, end)
/// with a missing end meaning "until end of file". Misc: declared levels.
struct Index {
    IndexKind kind = IndexKind::Filewise;
    std::vector<IndexLevel> levels;
    std::vector<std::vector<Value>> columns;  // one per level, equal length

    static Index filewise(std::vector<std::string> files);
    static Index segmented(std::vector<std::string> files, std::vector<Duration> starts,
                           std::vector<std::optional<Duration>> ends);
    static Index empty_like(const Index& other);

    std::size_t size() const { return columns.empty() ? 0 : columns.front().size(); }
    bool is_file_based() const { return kind != IndexKind::Misc; }

    const std::string& file(std::size_t row) const;
    Duration start(std::size_t row) const;
    std::optional<Duration> end(std::size_t row) const;

    void push_row(std::vector<Value> row);
    std::vector<Value> row(std::size_t i) const;

    friend bool operator==(const Index&, const Index&) = default;
};

/// Throws Validation on duplicate rows, bad segments, unsafe file paths,
/// or level values of the wrong dtype.
void validate_index(const Index& index);

struct Violation {
    std::string reason;
};

/// `misc_labels` supplies the label set of a misc-backed scheme.
std::optional<Violation> validate_value(const Value& v, const Scheme& s,
                                        const std::set<Value>* misc_labels = nullptr);

/// Schemes of a header plus the label sets of misc tables bound so far.
class SchemeRegistry {
public:
    explicit SchemeRegistry(const Header& header);

    /// Records `misc`'s first-level index values as labels for every scheme
    /// referencing table `table_id`.
    void bind_labels(const std::string& table_id, const Index& misc);

    bool labels_bound(const std::string& scheme_id) const;
    const Scheme& scheme(const std::string& scheme_id) const;
    DType column_dtype(const ColumnDecl& c) const;
    std::optional<Violation> check(const Value& v, const std::string& scheme_id) const;

private:
    std::map<std::string, Scheme> schemes_;
    std::map<std::string, std::set<Value>> labels_;
};

struct Column {
    std::string id;
    std::optional<std::string> scheme_id;
    std::optional<std::string> rater_id;
    std::vector<Value> values;
    friend bool operator==(const Column&, const Column&) = default;
};

/// Annotation table. Construction validates the index and every value
/// against its column's scheme, so a Table in hand is always valid.
class Table {
public:
    Table(std::string id, Index index, std::vector<Column> columns, const SchemeRegistry& schemes,
          std::optional<std::string> split_id = std::nullopt);

    /// Skips validation. Only for content restored from a trusted snapshot.
    static Table trusted(std::string id, Index index, std::vector<Column> columns,
                         std::optional<std::string> split_id);

    const std::string& id() const { return id_; }
    const Index& index() const { return index_; }
    const std::vector<Column>& columns() const { return columns_; }
    const std::optional<std::string>& split_id() const { return split_id_; }
    std::size_t rows() const { return index_.size(); }

    const Column& column(std::string_view id) const;  // throws NotFound
    const Column* find_column(std::string_view id) const;

    /// Keeps rows for which keep(row) is true.
    Table filter_rows(const std::vector<bool>& keep) const;

    /// Distinct file paths of a filewise/segmented index, in first-seen order.
    std::vector<std::string> files() const;

    friend bool operator==(const Table&, const Table&) = default;

private:
    Table() = default;

    std::string id_;
    Index index_;
    std::vector<Column> columns_;
    std::optional<std::string> split_id_;
};

/// Values re-indexed for output; no scheme attached.
struct Frame {
    Index index;
    std::vector<std::string> column_ids;
    std::vector<std::vector<Value>> columns;

    std::size_t rows() const { return index.size(); }
    friend bool operator==(const Frame&, const Frame&) = default;
};

struct GetOptions {
    std::optional<Index> index;        // target filewise or segmented index
    std::optional<std::string> column; // restrict to one column
    std::optional<std::string> map;    // misc-table column to map labels onto
};

/// Re-indexes `t` onto `opts.index` (filewise values broadcast to every
/// segment of the same file; target rows whose file or segment is absent
/// from `t` are dropped) and optionally maps misc-backed labels through
/// column `opts.map` of the backing misc table found in `tables`.
Frame table_get(const Table& t, const GetOptions& opts, const Header& header,
                const std::map<std::string, Table>& tables);

/// table_get without label mapping.
Frame table_get(const Table& t, const GetOptions& opts = {});

}  // namespace audvault
