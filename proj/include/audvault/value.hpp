#pragma once

#include "audvault/duration.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace audvault {

enum class DType { Bool, Date, Float, Integer, Object, String, Time };

const char* dtype_name(DType t);
DType parse_dtype(std::string_view name);  // throws InvalidArgument

/// A single table cell. monostate is a missing value; Object cells are
/// kept as their textual form.
using Value = std::variant<std::monostate, bool, std::int64_t, double, std::string, Date, Duration>;

inline bool is_missing(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// True when the runtime alternative is the storage type used for `t`.
bool holds_dtype(const Value& v, DType t);

/// Parses a non-missing CSV cell as `t`. Throws InvalidArgument.
Value parse_value(std::string_view text, DType t);

/// Canonical text form used by CSV and YAML output. Missing -> "".
std::string format_value(const Value& v);

/// Numeric view for bound checks; Time yields seconds.
bool numeric_value(const Value& v, double& out);

}  // namespace audvault
