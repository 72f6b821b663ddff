#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace audvault {

/// Dotted segments compare numerically when both are digits, else as text;
/// a "-suffix" pre-release orders before the plain release; remaining
/// ties fall back to plain string order. Returns <0, 0, >0.
int compare_versions(std::string_view a, std::string_view b);

struct VersionLess {
    bool operator()(std::string_view a, std::string_view b) const { return compare_versions(a, b) < 0; }
};

/// Non-empty, only [A-Za-z0-9._+-], not "." or "..".
bool is_valid_version(std::string_view v);

void sort_versions(std::vector<std::string>& versions);

}  // namespace audvault
