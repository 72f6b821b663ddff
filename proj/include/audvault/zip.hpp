#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace audvault {

/// Writes a ZIP archive holding `files` (paths relative to `root`). Members
/// are sorted, timestamps zeroed, and each member is deflated unless that
/// does not shrink it, so equal inputs give byte-identical archives.
void zip_create(const std::vector<std::string>& files, const std::filesystem::path& root,
                const std::filesystem::path& out);

/// Member names in archive order.
std::vector<std::string> zip_list(const std::filesystem::path& archive);

/// Extracts every member below `dest`, verifying CRC and size. Rejects
/// absolute names and ".." components before writing anything.
std::vector<std::string> zip_extract(const std::filesystem::path& archive, const std::filesystem::path& dest);

}  // namespace audvault
