#include "audvault/version.hpp"

#include <algorithm>
#include <cctype>

namespace audvault {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t p = s.find(sep, start);
        out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

int compare_numeric(std::string_view a, std::string_view b) {
    a.remove_prefix(std::min(a.find_first_not_of('0'), a.size()));
    b.remove_prefix(std::min(b.find_first_not_of('0'), b.size()));
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    return a.compare(b) < 0 ? -1 : (a == b ? 0 : 1);
}

int compare_dotted(std::string_view a, std::string_view b) {
    const auto sa = split(a, '.');
    const auto sb = split(b, '.');
    for (std::size_t i = 0; i < std::max(sa.size(), sb.size()); ++i) {
        const std::string_view x = i < sa.size() ? sa[i] : "0";
        const std::string_view y = i < sb.size() ? sb[i] : "0";
        int c = 0;
        if (all_digits(x) && all_digits(y)) {
            c = compare_numeric(x, y);
        } else {
            c = x.compare(y) < 0 ? -1 : (x == y ? 0 : 1);
        }
        if (c != 0) return c;
    }
    return 0;
}

}  // namespace

int compare_versions(std::string_view a, std::string_view b) {
    const std::size_t da = a.find('-');
    const std::size_t db = b.find('-');
    const std::string_view ma = a.substr(0, da);
    const std::string_view mb = b.substr(0, db);
    if (int c = compare_dotted(ma, mb); c != 0) return c;
    const bool pa = da != std::string_view::npos;
    const bool pb = db != std::string_view::npos;
    if (pa != pb) return pa ? -1 : 1;
    if (pa) {
        if (int c = compare_dotted(a.substr(da + 1), b.substr(db + 1)); c != 0) return c;
    }
    return a.compare(b) < 0 ? -1 : (a == b ? 0 : 1);
}

bool is_valid_version(std::string_view v) {
    if (v.empty() || v == "." || v == "..") return false;
    return std::all_of(v.begin(), v.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '+' || c == '-';
    });
}

void sort_versions(std::vector<std::string>& versions) {
    std::sort(versions.begin(), versions.end(), VersionLess{});
}

}  // namespace audvault
