#pragma once

#include <filesystem>
#include <string>

namespace audvault {

/// Process- and thread-unique name suffix.
std::string unique_suffix();

/// Directory removed recursively on destruction.
class TempDir {
public:
    /// Created below `parent`, or the system temp directory when empty.
    explicit TempDir(const std::filesystem::path& parent = {}, const std::string& prefix = "audvault");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Writes via a sibling temporary and rename.
void atomic_copy(const std::filesystem::path& from, const std::filesystem::path& to);
void atomic_write(const std::filesystem::path& to, std::string_view content);

}  // namespace audvault
