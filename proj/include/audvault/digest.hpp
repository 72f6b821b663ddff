#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

namespace audvault {

/// Lowercase hex MD5; reads `in` in fixed-size chunks.
std::string compute_digest(std::istream& in);
std::string compute_digest(std::string_view bytes);
std::string file_digest(const std::filesystem::path& p);

inline const std::string kZeroDigest(32, '0');

}  // namespace audvault
