#include "audvault/value.hpp"

#include "audvault/error.hpp"

#include <charconv>
#include <cmath>

namespace audvault {

const char* dtype_name(DType t) {
    switch (t) {
    case DType::Bool: return "bool";
    case DType::Date: return "date";
    case DType::Float: return "float";
    case DType::Integer: return "integer";
    case DType::Object: return "object";
    case DType::String: return "string";
    case DType::Time: return "time";
    }
    return "object";
}

DType parse_dtype(std::string_view name) {
    if (name == "bool") return DType::Bool;
    if (name == "date") return DType::Date;
    if (name == "float") return DType::Float;
    if (name == "integer" || name == "int") return DType::Integer;
    if (name == "object") return DType::Object;
    if (name == "string" || name == "str") return DType::String;
    if (name == "time") return DType::Time;
    fail(ErrorCode::InvalidArgument, "malformed dtype: '" + std::string(name) + "'");
}

bool holds_dtype(const Value& v, DType t) {
    switch (t) {
    case DType::Bool: return std::holds_alternative<bool>(v);
    case DType::Date: return std::holds_alternative<Date>(v);
    case DType::Float: return std::holds_alternative<double>(v);
    case DType::Integer: return std::holds_alternative<std::int64_t>(v);
    case DType::Object:
    case DType::String: return std::holds_alternative<std::string>(v);
    case DType::Time: return std::holds_alternative<Duration>(v);
    }
    return false;
}

Value parse_value(std::string_view text, DType t) {
    auto bad = [&]() -> Value {
        fail(ErrorCode::InvalidArgument,
             "cannot parse '" + std::string(text) + "' as " + dtype_name(t));
    };
    switch (t) {
    case DType::Bool:
        if (text == "True" || text == "true" || text == "1") return true;
        if (text == "False" || text == "false" || text == "0") return false;
        return bad();
    case DType::Integer: {
        std::int64_t v = 0;
        const char* end = text.data() + text.size();
        const char* begin = text.data();
        if (begin != end && *begin == '+') ++begin;
        auto [p, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || p != end) return bad();
        return v;
    }
    case DType::Float: {
        double v = 0;
        const char* end = text.data() + text.size();
        auto [p, ec] = std::from_chars(text.data(), end, v);
        if (ec != std::errc{} || p != end || !std::isfinite(v)) return bad();
        return v;
    }
    case DType::Date: return parse_date(text);
    case DType::Time: return parse_duration(text);
    case DType::Object:
    case DType::String: return std::string(text);
    }
    return bad();
}

std::string format_value(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(bool b) const { return b ? "True" : "False"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const {
            char buf[64];
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
            std::string out(buf, p);
            // keep floats recognisable as floats
            if (out.find_first_of(".eE") == std::string::npos) out += ".0";
            return out;
        }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(Date d) const { return format_date(d); }
        std::string operator()(Duration d) const { return format_duration(d); }
    };
    return std::visit(Visitor{}, v);
}

bool numeric_value(const Value& v, double& out) {
    if (auto p = std::get_if<std::int64_t>(&v)) {
        out = static_cast<double>(*p);
        return true;
    }
    if (auto p = std::get_if<double>(&v)) {
        out = *p;
        return true;
    }
    if (auto p = std::get_if<Duration>(&v)) {
        out = p->seconds();
        return true;
    }
    return false;
}

}  // namespace audvault
