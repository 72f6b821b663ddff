#pragma once

#include "audvault/header.hpp"
#include "audvault/table.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace audvault {

namespace csv {

/// A raw field. `quoted` distinguishes `""` (empty string) from an empty
/// unquoted field (missing value).
struct Cell {
    std::string text;
    bool quoted = false;
};

/// Comma-separated, `"`-quoted, LF or CRLF line endings.
class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    /// Fills `record` with the next row; false at end of input.
    bool next(std::vector<Cell>& record);
    std::size_t line() const { return line_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

/// Appends `text` to `out`, quoting when it contains a comma, quote, or
/// line break, or when `force_quote` is set.
void append_field(std::string& out, std::string_view text, bool force_quote = false);

/// Appends the CSV form of a value: missing -> empty, empty string -> `""`.
void append_value(std::string& out, const Value& v);

}  // namespace csv

/// Parses `db.<table_id>.csv`. The header row must list the index levels
/// followed by the declared columns in declaration order.
Table parse_table_csv(std::string_view text, const std::string& table_id, const TableDecl& decl,
                      const SchemeRegistry& schemes);

/// Deterministic CSV: index levels first, then columns in table order.
std::string serialize_table_csv(const Table& t);

std::string serialize_frame_csv(const Frame& f);

}  // namespace audvault
