#include "audvault/csv.hpp"

#include "audvault/error.hpp"

namespace audvault {

namespace csv {

bool Reader::next(std::vector<Cell>& record) {
    record.clear();
    if (pos_ >= text_.size()) {
        return false;
    }
    ++line_;
    Cell cell;
    bool in_quotes = false;
    while (pos_ < text_.size()) {
        const char c = text_[pos_];
        if (in_quotes) {
            if (c == '"') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
                    cell.text += '"';
                    pos_ += 2;
                    continue;
                }
                in_quotes = false;
                ++pos_;
                continue;
            }
            if (c == '\n') ++line_;
            cell.text += c;
            ++pos_;
            continue;
        }
        if (c == '"') {
            if (!cell.text.empty() || cell.quoted) {
                fail(ErrorCode::InvalidArgument, "CSV line " + std::to_string(line_) + ": stray quote");
            }
            cell.quoted = true;
            in_quotes = true;
            ++pos_;
        } else if (c == ',') {
            record.push_back(std::move(cell));
            cell = Cell{};
            ++pos_;
        } else if (c == '\n' || c == '\r') {
            ++pos_;
            if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
            record.push_back(std::move(cell));
            return true;
        } else {
            if (cell.quoted) {
                fail(ErrorCode::InvalidArgument, "CSV line " + std::to_string(line_) + ": text after closing quote");
            }
            cell.text += c;
            ++pos_;
        }
    }
    if (in_quotes) {
        fail(ErrorCode::InvalidArgument, "CSV line " + std::to_string(line_) + ": unterminated quote");
    }
    record.push_back(std::move(cell));
    return true;
}

void append_field(std::string& out, std::string_view text, bool force_quote) {
    const bool quote = force_quote || text.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!quote) {
        out += text;
        return;
    }
    out += '"';
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

void append_value(std::string& out, const Value& v) {
    if (is_missing(v)) return;
    if (auto s = std::get_if<std::string>(&v)) {
        append_field(out, *s, s->empty());
        return;
    }
    append_field(out, format_value(v));
}

}  // namespace csv

namespace {

Value parse_cell(const csv::Cell& cell, DType t) {
    if (cell.text.empty() && !cell.quoted) {
        return Value{};
    }
    return parse_value(cell.text, t);
}

void append_row(std::string& out, const Index& index, const std::vector<const std::vector<Value>*>& columns,
                std::size_t row) {
    bool first = true;
    for (const auto& level : index.columns) {
        if (!first) out += ',';
        first = false;
        csv::append_value(out, level[row]);
    }
    for (const auto* col : columns) {
        if (!first) out += ',';
        first = false;
        csv::append_value(out, (*col)[row]);
    }
    out += '\n';
}

std::string serialize(const Index& index, const std::vector<std::string>& names,
                      const std::vector<const std::vector<Value>*>& columns) {
    std::string out;
    bool first = true;
    for (const auto& level : index.levels) {
        if (!first) out += ',';
        first = false;
        csv::append_field(out, level.name);
    }
    for (const auto& n : names) {
        if (!first) out += ',';
        first = false;
        csv::append_field(out, n);
    }
    out += '\n';
    for (std::size_t r = 0; r < index.size(); ++r) append_row(out, index, columns, r);
    return out;
}

}  // namespace

Table parse_table_csv(std::string_view text, const std::string& table_id, const TableDecl& decl,
                      const SchemeRegistry& schemes) {
    const std::vector<IndexLevel> levels = decl.index_levels();
    csv::Reader reader(text);
    std::vector<csv::Cell> record;
    if (!reader.next(record)) {
        fail(ErrorCode::InvalidArgument, "table '" + table_id + "': empty CSV");
    }
    std::vector<std::string> expected;
    for (const auto& l : levels) expected.push_back(l.name);
    for (const auto& c : decl.columns) expected.push_back(c.id);
    bool header_ok = record.size() == expected.size();
    for (std::size_t i = 0; header_ok && i < record.size(); ++i) header_ok = record[i].text == expected[i];
    if (!header_ok) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        fail(ErrorCode::InvalidArgument, "table '" + table_id + "': CSV header does not match '" + want + "'");
    }

    std::vector<DType> col_types;
    for (const auto& c : decl.columns) col_types.push_back(schemes.column_dtype(c));

    Index index;
    index.kind = decl.kind;
    index.levels = levels;
    index.columns.resize(levels.size());
    std::vector<Column> columns;
    for (const auto& c : decl.columns) columns.push_back(Column{c.id, c.scheme_id, c.rater_id, {}});

    while (reader.next(record)) {
        if (record.size() == 1 && record[0].text.empty() && !record[0].quoted) {
            continue;  // blank line
        }
        if (record.size() != expected.size()) {
            fail(ErrorCode::InvalidArgument, "table '" + table_id + "' line " + std::to_string(reader.line()) +
                                                 ": expected " + std::to_string(expected.size()) + " fields");
        }
        try {
            for (std::size_t l = 0; l < levels.size(); ++l) {
                index.columns[l].push_back(parse_cell(record[l], levels[l].dtype));
            }
            for (std::size_t c = 0; c < columns.size(); ++c) {
                columns[c].values.push_back(parse_cell(record[levels.size() + c], col_types[c]));
            }
        } catch (const Error& e) {
            fail(e.code(), "table '" + table_id + "' line " + std::to_string(reader.line()) + ": " + e.what());
        }
    }
    return Table(table_id, std::move(index), std::move(columns), schemes, decl.split_id);
}

std::string serialize_table_csv(const Table& t) {
    std::vector<std::string> names;
    std::vector<const std::vector<Value>*> cols;
    for (const auto& c : t.columns()) {
        names.push_back(c.id);
        cols.push_back(&c.values);
    }
    return serialize(t.index(), names, cols);
}

std::string serialize_frame_csv(const Frame& f) {
    std::vector<const std::vector<Value>*> cols;
    for (const auto& c : f.columns) cols.push_back(&c);
    return serialize(f.index, f.column_ids, cols);
}

}  // namespace audvault
