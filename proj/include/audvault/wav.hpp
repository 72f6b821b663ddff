#pragma once

#include "audvault/duration.hpp"

#include <filesystem>
#include <vector>

namespace audvault {

/// Stream properties of a media file as recorded in the dependency table.
struct MediaInfo {
    int bit_depth = 0;
    int channels = 0;
    int sampling_rate = 0;
    Duration duration;
    friend bool operator==(const MediaInfo&, const MediaInfo&) = default;
};

enum class SampleFormat { Int, Float };

/// De-interleaved samples in [-1, 1].
struct AudioBuffer {
    int sampling_rate = 0;
    std::vector<std::vector<double>> channels;
    SampleFormat source_format = SampleFormat::Int;  // encoding it was read from

    std::size_t channel_count() const { return channels.size(); }
    std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
    Duration duration() const;
};

/// Reads only the RIFF chunk headers. Throws InvalidArgument for files that
/// are not RIFF/WAVE or use a non-PCM encoding; Corrupt when truncated.
MediaInfo scan_media(const std::filesystem::path& file);

/// Accepts 8/16/24/32-bit integer PCM and 32-bit IEEE float.
AudioBuffer read_wav(const std::filesystem::path& file);

/// Writes a canonical 44-byte-header WAV. Integer depths are 16, 24, 32;
/// Float requires 32. Out-of-range amplitudes are clipped.
void write_wav(const AudioBuffer& buf, int bit_depth, const std::filesystem::path& file,
               SampleFormat format = SampleFormat::Int);

}  // namespace audvault
