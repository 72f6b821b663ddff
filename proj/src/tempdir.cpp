#include "audvault/tempdir.hpp"

#include "audvault/error.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>

namespace audvault {

namespace fs = std::filesystem;

std::string unique_suffix() {
    static std::atomic<unsigned long> counter{0};
    static const unsigned long salt = std::random_device{}();
    return std::to_string(::getpid()) + "-" + std::to_string(salt) + "-" + std::to_string(counter++);
}

TempDir::TempDir(const fs::path& parent, const std::string& prefix) {
    const fs::path base = parent.empty() ? fs::temp_directory_path() : parent;
    fs::create_directories(base);
    path_ = base / (prefix + "." + unique_suffix());
    fs::create_directory(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void atomic_copy(const fs::path& from, const fs::path& to) {
    if (to.has_parent_path()) fs::create_directories(to.parent_path());
    const fs::path tmp = to.string() + ".tmp." + unique_suffix();
    std::error_code ec;
    fs::copy_file(from, tmp, fs::copy_options::overwrite_existing, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorCode::Io, "cannot copy '" + from.string() + "' to '" + to.string() + "'");
    }
    fs::rename(tmp, to, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorCode::Io, "cannot move into '" + to.string() + "'");
    }
}

void atomic_write(const fs::path& to, std::string_view content) {
    if (to.has_parent_path()) fs::create_directories(to.parent_path());
    const fs::path tmp = to.string() + ".tmp." + unique_suffix();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            fail(ErrorCode::Io, "cannot write '" + to.string() + "'");
        }
    }
    fs::rename(tmp, to);
}

}  // namespace audvault
