#include "audvault/header.hpp"

#include "audvault/error.hpp"
#include "audvault/path_util.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <set>

namespace audvault {

const char* index_kind_name(IndexKind k) {
    switch (k) {
    case IndexKind::Filewise: return "filewise";
    case IndexKind::Segmented: return "segmented";
    case IndexKind::Misc: return "misc";
    }
    return "misc";
}

std::vector<IndexLevel> TableDecl::index_levels() const {
    switch (kind) {
    case IndexKind::Filewise: return {{"file", DType::String}};
    case IndexKind::Segmented:
        return {{"file", DType::String}, {"start", DType::Time}, {"end", DType::Time}};
    case IndexKind::Misc: return levels;
    }
    return levels;
}

const ColumnDecl* TableDecl::find_column(std::string_view id) const {
    auto it = std::find_if(columns.begin(), columns.end(), [&](const ColumnDecl& c) { return c.id == id; });
    return it == columns.end() ? nullptr : &*it;
}

const Scheme* Header::find_scheme(std::string_view id) const {
    auto it = schemes.find(std::string(id));
    return it == schemes.end() ? nullptr : &it->second;
}

const TableDecl& Header::table(std::string_view id) const {
    auto it = tables.find(std::string(id));
    if (it == tables.end()) {
        fail(ErrorCode::NotFound, "table '" + std::string(id) + "' not declared in header");
    }
    return it->second;
}

const char* split_type_name(SplitType t) {
    switch (t) {
    case SplitType::Train: return "train";
    case SplitType::Dev: return "dev";
    case SplitType::Test: return "test";
    case SplitType::Other: return "other";
    }
    return "other";
}

namespace {

SplitType parse_split(const std::string& s) {
    if (s == "train") return SplitType::Train;
    if (s == "dev") return SplitType::Dev;
    if (s == "test") return SplitType::Test;
    if (s == "other") return SplitType::Other;
    fail(ErrorCode::InvalidArgument, "unknown split type '" + s + "'");
}

IndexKind parse_kind(const std::string& s) {
    if (s == "filewise") return IndexKind::Filewise;
    if (s == "segmented") return IndexKind::Segmented;
    if (s == "misc") return IndexKind::Misc;
    fail(ErrorCode::InvalidArgument, "unknown table type '" + s + "'");
}

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::Validation, msg); }

std::string scalar(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) {
        fail(ErrorCode::InvalidArgument, what + " must be a scalar");
    }
    return n.Scalar();
}

std::optional<std::string> optional_scalar(const YAML::Node& parent, const char* key) {
    const YAML::Node n = parent[key];
    if (!n || n.IsNull()) {
        return std::nullopt;
    }
    return scalar(n, key);
}

double parse_number(const std::string& s, const std::string& what) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        fail(ErrorCode::InvalidArgument, what + ": not a number: '" + s + "'");
    }
    return v;
}

std::string number_text(double d) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, p);
}

Scheme parse_scheme(const std::string& id, const YAML::Node& n) {
    if (!n.IsMap()) {
        fail(ErrorCode::InvalidArgument, "scheme '" + id + "' must be a mapping");
    }
    Scheme s;
    if (auto d = optional_scalar(n, "dtype")) {
        s.dtype = parse_dtype(*d);
    }
    if (const YAML::Node labels = n["labels"]) {
        if (labels.IsSequence()) {
            std::vector<Value> values;
            for (const auto& item : labels) {
                values.push_back(parse_value(scalar(item, "label"), s.dtype));
            }
            s.labels = std::move(values);
        } else if (labels.IsScalar()) {
            s.labels_table = labels.Scalar();
        } else {
            fail(ErrorCode::InvalidArgument, "labels of scheme '" + id + "' must be a list or a table id");
        }
    }
    if (auto v = optional_scalar(n, "minimum")) s.minimum = parse_number(*v, "minimum");
    if (auto v = optional_scalar(n, "maximum")) s.maximum = parse_number(*v, "maximum");
    s.description = optional_scalar(n, "description");
    return s;
}

TableDecl parse_table_decl(const std::string& id, const YAML::Node& n) {
    if (!n.IsMap()) {
        fail(ErrorCode::InvalidArgument, "table '" + id + "' must be a mapping");
    }
    TableDecl t;
    t.kind = parse_kind(optional_scalar(n, "type").value_or("filewise"));
    if (const YAML::Node levels = n["levels"]) {
        if (t.kind != IndexKind::Misc) {
            fail(ErrorCode::InvalidArgument, "table '" + id + "': levels only allowed on misc tables");
        }
        for (const auto& kv : levels) {
            t.levels.push_back({kv.first.as<std::string>(), parse_dtype(scalar(kv.second, "level dtype"))});
        }
    }
    if (const YAML::Node columns = n["columns"]) {
        for (const auto& kv : columns) {
            ColumnDecl c;
            c.id = kv.first.as<std::string>();
            if (kv.second.IsMap()) {
                c.scheme_id = optional_scalar(kv.second, "scheme_id");
                c.rater_id = optional_scalar(kv.second, "rater_id");
                c.description = optional_scalar(kv.second, "description");
            } else if (!kv.second.IsNull()) {
                fail(ErrorCode::InvalidArgument, "column '" + c.id + "' must be a mapping");
            }
            t.columns.push_back(std::move(c));
        }
    }
    t.split_id = optional_scalar(n, "split_id");
    t.description = optional_scalar(n, "description");
    return t;
}

const std::set<std::string> kKnownKeys = {
    "name", "source", "usage", "author", "description", "expires", "languages", "license",
    "organisation", "schemes", "tables", "splits", "raters", "attachments",
};

}  // namespace

void validate_header(const Header& h) {
    if (h.name.empty()) invalid("missing mandatory field: name");
    if (h.source.empty()) invalid("missing mandatory field: source");
    if (h.usage.empty()) invalid("missing mandatory field: usage");

    for (const auto& [id, s] : h.schemes) {
        if (s.labels && s.labels_table) {
            invalid("scheme '" + id + "' has both a label list and a label table");
        }
        if (s.labels_table) {
            auto t = h.tables.find(*s.labels_table);
            if (t == h.tables.end()) {
                invalid("scheme '" + id + "' references unknown table '" + *s.labels_table + "'");
            }
            if (t->second.kind != IndexKind::Misc) {
                invalid("scheme '" + id + "' label table '" + *s.labels_table + "' is not a misc table");
            }
        }
        if (s.labels) {
            for (const auto& v : *s.labels) {
                if (!holds_dtype(v, s.dtype)) invalid("scheme '" + id + "' has a label of the wrong dtype");
            }
        }
        const bool numeric = s.dtype == DType::Integer || s.dtype == DType::Float || s.dtype == DType::Time;
        if ((s.minimum || s.maximum) && !numeric) {
            invalid("scheme '" + id + "': bounds require a numeric or time dtype");
        }
        if (s.minimum && s.maximum && *s.minimum > *s.maximum) {
            invalid("scheme '" + id + "': minimum exceeds maximum");
        }
    }

    for (const auto& [id, t] : h.tables) {
        if (t.kind == IndexKind::Misc && t.levels.empty()) {
            invalid("misc table '" + id + "' declares no index levels");
        }
        std::set<std::string> names;
        for (const auto& level : t.index_levels()) {
            if (!names.insert(level.name).second) invalid("table '" + id + "': duplicate level '" + level.name + "'");
        }
        for (const auto& c : t.columns) {
            if (c.id.empty()) invalid("table '" + id + "': empty column id");
            if (!names.insert(c.id).second) invalid("table '" + id + "': duplicate column '" + c.id + "'");
            if (c.scheme_id && !h.schemes.contains(*c.scheme_id)) {
                invalid("table '" + id + "' column '" + c.id + "' references unknown scheme '" + *c.scheme_id + "'");
            }
            if (c.rater_id && !h.raters.contains(*c.rater_id)) {
                invalid("table '" + id + "' column '" + c.id + "' references unknown rater '" + *c.rater_id + "'");
            }
        }
        if (t.split_id && !h.splits.contains(*t.split_id)) {
            invalid("table '" + id + "' references unknown split '" + *t.split_id + "'");
        }
    }

    for (const auto& [id, path] : h.attachments) {
        if (!is_safe_relative_path(path)) invalid("attachment '" + id + "' has an unsafe path '" + path + "'");
    }
}

Header parse_header(std::string_view yaml) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed header YAML: ") + e.what());
    }
    if (!root.IsMap()) {
        fail(ErrorCode::InvalidArgument, "header must be a YAML mapping");
    }

    Header h;
    try {
        h.name = optional_scalar(root, "name").value_or("");
        h.source = optional_scalar(root, "source").value_or("");
        h.usage = optional_scalar(root, "usage").value_or("");
        h.author = optional_scalar(root, "author");
        h.description = optional_scalar(root, "description");
        if (auto e = optional_scalar(root, "expires")) h.expires = parse_date(*e);
        if (const YAML::Node langs = root["languages"]) {
            if (langs.IsScalar()) {
                h.languages.push_back(langs.Scalar());
            } else {
                for (const auto& l : langs) h.languages.push_back(scalar(l, "language"));
            }
        }
        h.license = optional_scalar(root, "license");
        h.organisation = optional_scalar(root, "organisation");

        for (const auto& kv : root["schemes"]) {
            const auto id = kv.first.as<std::string>();
            h.schemes.emplace(id, parse_scheme(id, kv.second));
        }
        for (const auto& kv : root["tables"]) {
            const auto id = kv.first.as<std::string>();
            h.tables.emplace(id, parse_table_decl(id, kv.second));
        }
        for (const auto& kv : root["splits"]) {
            SplitDecl s;
            if (kv.second.IsMap()) {
                s.type = parse_split(optional_scalar(kv.second, "type").value_or("other"));
                s.description = optional_scalar(kv.second, "description");
            }
            h.splits.emplace(kv.first.as<std::string>(), s);
        }
        for (const auto& kv : root["raters"]) {
            RaterDecl r;
            if (kv.second.IsMap()) {
                r.type = optional_scalar(kv.second, "type").value_or("human");
                r.description = optional_scalar(kv.second, "description");
            }
            h.raters.emplace(kv.first.as<std::string>(), r);
        }
        for (const auto& kv : root["attachments"]) {
            h.attachments.emplace(kv.first.as<std::string>(), scalar(kv.second, "attachment path"));
        }
        for (const auto& kv : root) {
            const auto key = kv.first.as<std::string>();
            if (kKnownKeys.contains(key)) continue;
            if (!kv.second.IsScalar()) {
                fail(ErrorCode::InvalidArgument, "custom field '" + key + "' must be a scalar");
            }
            h.custom.emplace(key, kv.second.Scalar());
        }
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed header: ") + e.what());
    }
    validate_header(h);
    return h;
}

namespace {

void emit_opt(YAML::Emitter& out, const char* key, const std::optional<std::string>& v) {
    if (v) out << YAML::Key << key << YAML::Value << *v;
}

}  // namespace

std::string serialize_header(const Header& h) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << h.name;
    out << YAML::Key << "source" << YAML::Value << h.source;
    out << YAML::Key << "usage" << YAML::Value << h.usage;
    emit_opt(out, "author", h.author);
    emit_opt(out, "description", h.description);
    if (h.expires) out << YAML::Key << "expires" << YAML::Value << format_date(*h.expires);
    if (!h.languages.empty()) {
        out << YAML::Key << "languages" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& l : h.languages) out << l;
        out << YAML::EndSeq;
    }
    emit_opt(out, "license", h.license);
    emit_opt(out, "organisation", h.organisation);
    for (const auto& [k, v] : h.custom) out << YAML::Key << k << YAML::Value << v;

    if (!h.attachments.empty()) {
        out << YAML::Key << "attachments" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : h.attachments) out << YAML::Key << k << YAML::Value << v;
        out << YAML::EndMap;
    }
    if (!h.raters.empty()) {
        out << YAML::Key << "raters" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, r] : h.raters) {
            out << YAML::Key << k << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "type" << YAML::Value << r.type;
            emit_opt(out, "description", r.description);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    if (!h.schemes.empty()) {
        out << YAML::Key << "schemes" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, s] : h.schemes) {
            out << YAML::Key << k << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "dtype" << YAML::Value << dtype_name(s.dtype);
            if (s.labels) {
                out << YAML::Key << "labels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (const auto& v : *s.labels) out << format_value(v);
                out << YAML::EndSeq;
            } else if (s.labels_table) {
                out << YAML::Key << "labels" << YAML::Value << *s.labels_table;
            }
            if (s.minimum) out << YAML::Key << "minimum" << YAML::Value << number_text(*s.minimum);
            if (s.maximum) out << YAML::Key << "maximum" << YAML::Value << number_text(*s.maximum);
            emit_opt(out, "description", s.description);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    if (!h.splits.empty()) {
        out << YAML::Key << "splits" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, s] : h.splits) {
            out << YAML::Key << k << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "type" << YAML::Value << split_type_name(s.type);
            emit_opt(out, "description", s.description);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    if (!h.tables.empty()) {
        out << YAML::Key << "tables" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, t] : h.tables) {
            out << YAML::Key << k << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "type" << YAML::Value << index_kind_name(t.kind);
            if (!t.levels.empty()) {
                out << YAML::Key << "levels" << YAML::Value << YAML::BeginMap;
                for (const auto& l : t.levels) out << YAML::Key << l.name << YAML::Value << dtype_name(l.dtype);
                out << YAML::EndMap;
            }
            emit_opt(out, "split_id", t.split_id);
            emit_opt(out, "description", t.description);
            if (!t.columns.empty()) {
                out << YAML::Key << "columns" << YAML::Value << YAML::BeginMap;
                for (const auto& c : t.columns) {
                    out << YAML::Key << c.id << YAML::Value << YAML::BeginMap;
                    emit_opt(out, "scheme_id", c.scheme_id);
                    emit_opt(out, "rater_id", c.rater_id);
                    emit_opt(out, "description", c.description);
                    out << YAML::EndMap;
                }
                out << YAML::EndMap;
            }
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace audvault
