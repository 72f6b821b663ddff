#pragma once

#include "audvault/table.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace audvault {

/// Bumped whenever the binary layout changes; readers reject other tags.
inline constexpr std::uint32_t kSnapshotFormat = 1;

/// Binary table image: typed columns, durations and dates as int64
/// nanoseconds, CRC32 trailer. `source_digest` names the CSV it mirrors.
std::string encode_snapshot(const Table& t, const std::string& source_digest,
                            std::uint32_t format_tag = kSnapshotFormat);

/// nullopt when the bytes are corrupt, carry another format tag, or were
/// made from a different CSV.
std::optional<Table> decode_snapshot(std::string_view bytes, const std::string& source_digest,
                                     std::uint32_t format_tag = kSnapshotFormat);

void write_snapshot(const Table& t, const std::string& source_digest, const std::filesystem::path& file,
                    std::uint32_t format_tag = kSnapshotFormat);
std::optional<Table> read_snapshot(const std::filesystem::path& file, const std::string& source_digest,
                                   std::uint32_t format_tag = kSnapshotFormat);

}  // namespace audvault
