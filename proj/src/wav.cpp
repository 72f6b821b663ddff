#include "audvault/wav.hpp"

#include "audvault/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace audvault {

namespace fs = std::filesystem;

Duration AudioBuffer::duration() const {
    if (sampling_rate <= 0) return Duration{};
    return Duration{static_cast<std::int64_t>(frames()) * 1'000'000'000 / sampling_rate};
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
    out += static_cast<char>(v & 0xff);
    out += static_cast<char>(v >> 8);
}
void put32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

struct WavLayout {
    std::uint16_t format = 0;
    int channels = 0;
    int sampling_rate = 0;
    int bit_depth = 0;
    std::uint64_t data_offset = 0;
    std::uint64_t data_size = 0;
};

WavLayout parse_layout(std::ifstream& in, const fs::path& file) {
    const std::string name = file.string();
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);
    std::array<unsigned char, 12> riff{};
    if (!in.read(reinterpret_cast<char*>(riff.data()), riff.size()) ||
        std::memcmp(riff.data(), "RIFF", 4) != 0 || std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
        fail(ErrorCode::InvalidArgument, "not a RIFF/WAVE file: '" + name + "'");
    }
    WavLayout layout;
    bool have_fmt = false;
    std::uint64_t pos = 12;
    while (pos + 8 <= file_size) {
        std::array<unsigned char, 8> hdr{};
        in.seekg(static_cast<std::streamoff>(pos));
        if (!in.read(reinterpret_cast<char*>(hdr.data()), hdr.size())) break;
        const std::uint32_t size = le32(hdr.data() + 4);
        const std::uint64_t body = pos + 8;
        if (std::memcmp(hdr.data(), "fmt ", 4) == 0) {
            if (size < 16 || body + size > file_size) fail(ErrorCode::Corrupt, "truncated fmt chunk in '" + name + "'");
            std::vector<unsigned char> fmt(size);
            in.read(reinterpret_cast<char*>(fmt.data()), size);
            layout.format = le16(fmt.data());
            layout.channels = le16(fmt.data() + 2);
            layout.sampling_rate = static_cast<int>(le32(fmt.data() + 4));
            layout.bit_depth = le16(fmt.data() + 14);
            if (layout.format == kFormatExtensible && size >= 26) {
                layout.format = le16(fmt.data() + 24);  // first two bytes of the sub-format GUID
            }
            have_fmt = true;
        } else if (std::memcmp(hdr.data(), "data", 4) == 0) {
            if (!have_fmt) fail(ErrorCode::InvalidArgument, "data chunk before fmt chunk in '" + name + "'");
            if (body + size > file_size) fail(ErrorCode::Corrupt, "truncated data chunk in '" + name + "'");
            layout.data_offset = body;
            layout.data_size = size;
            break;
        }
        pos = body + size + (size & 1);
    }
    if (!have_fmt) fail(ErrorCode::InvalidArgument, "missing fmt chunk in '" + name + "'");
    if (layout.data_offset == 0) fail(ErrorCode::Corrupt, "missing data chunk in '" + name + "'");
    const bool pcm = layout.format == kFormatPcm &&
                     (layout.bit_depth == 8 || layout.bit_depth == 16 || layout.bit_depth == 24 || layout.bit_depth == 32);
    const bool flt = layout.format == kFormatFloat && layout.bit_depth == 32;
    if (!pcm && !flt) {
        fail(ErrorCode::InvalidArgument, "unsupported WAV encoding (format " + std::to_string(layout.format) + ", " +
                                             std::to_string(layout.bit_depth) + " bit) in '" + name + "'");
    }
    if (layout.channels <= 0 || layout.sampling_rate <= 0) {
        fail(ErrorCode::Corrupt, "invalid channel count or sampling rate in '" + name + "'");
    }
    return layout;
}

}  // namespace

MediaInfo scan_media(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot open '" + file.string() + "'");
    const WavLayout l = parse_layout(in, file);
    const std::uint64_t frame_bytes = static_cast<std::uint64_t>(l.channels) * (l.bit_depth / 8);
    const std::uint64_t frames = l.data_size / frame_bytes;
    return MediaInfo{l.bit_depth, l.channels, l.sampling_rate,
                     Duration{static_cast<std::int64_t>(frames * 1'000'000'000ULL / l.sampling_rate)}};
}

AudioBuffer read_wav(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot open '" + file.string() + "'");
    const WavLayout l = parse_layout(in, file);
    const int bytes = l.bit_depth / 8;
    const std::size_t frames = l.data_size / (static_cast<std::uint64_t>(l.channels) * bytes);
    std::vector<unsigned char> raw(frames * l.channels * bytes);
    in.seekg(static_cast<std::streamoff>(l.data_offset));
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        fail(ErrorCode::Corrupt, "truncated sample data in '" + file.string() + "'");
    }

    AudioBuffer buf;
    buf.sampling_rate = l.sampling_rate;
    buf.source_format = l.format == kFormatFloat ? SampleFormat::Float : SampleFormat::Int;
    buf.channels.assign(l.channels, std::vector<double>(frames));
    const double scale = std::ldexp(1.0, l.bit_depth - 1);
    const unsigned char* p = raw.data();
    for (std::size_t f = 0; f < frames; ++f) {
        for (int c = 0; c < l.channels; ++c, p += bytes) {
            double v = 0;
            if (l.format == kFormatFloat) {
                float x;
                const std::uint32_t bits = le32(p);
                std::memcpy(&x, &bits, 4);
                v = x;
            } else if (l.bit_depth == 8) {
                v = (static_cast<int>(p[0]) - 128) / 128.0;
            } else {
                std::uint32_t u = 0;
                for (int b = 0; b < bytes; ++b) u |= static_cast<std::uint32_t>(p[b]) << (8 * b);
                // sign-extend from bit_depth bits
                const int shift = 32 - l.bit_depth;
                const auto s = static_cast<std::int32_t>(u << shift) >> shift;
                v = s / scale;
            }
            buf.channels[c][f] = v;
        }
    }
    return buf;
}

void write_wav(const AudioBuffer& buf, int bit_depth, const fs::path& file, SampleFormat format) {
    const bool flt = format == SampleFormat::Float;
    if (flt ? bit_depth != 32 : (bit_depth != 16 && bit_depth != 24 && bit_depth != 32)) {
        fail(ErrorCode::InvalidArgument, "unsupported output bit depth " + std::to_string(bit_depth));
    }
    if (buf.sampling_rate <= 0 || buf.channels.empty()) {
        fail(ErrorCode::InvalidArgument, "cannot write an audio buffer without channels or sampling rate");
    }
    for (const auto& ch : buf.channels) {
        if (ch.size() != buf.frames()) fail(ErrorCode::InvalidArgument, "audio channels differ in length");
    }
    const int bytes = bit_depth / 8;
    const auto channels = static_cast<std::uint16_t>(buf.channel_count());
    const std::uint64_t data_size = static_cast<std::uint64_t>(buf.frames()) * channels * bytes;
    if (data_size > 0xFFFFFFFFULL - 36) fail(ErrorCode::InvalidArgument, "audio too long for a RIFF file");

    std::string out;
    out.reserve(44 + data_size);
    out += "RIFF";
    put32(out, static_cast<std::uint32_t>(36 + data_size));
    out += "WAVEfmt ";
    put32(out, 16);
    put16(out, flt ? kFormatFloat : kFormatPcm);
    put16(out, channels);
    put32(out, static_cast<std::uint32_t>(buf.sampling_rate));
    put32(out, static_cast<std::uint32_t>(buf.sampling_rate) * channels * bytes);
    put16(out, static_cast<std::uint16_t>(channels * bytes));
    put16(out, static_cast<std::uint16_t>(bit_depth));
    out += "data";
    put32(out, static_cast<std::uint32_t>(data_size));

    const double scale = std::ldexp(1.0, bit_depth - 1);
    const double lo = -scale;
    const double hi = scale - 1;
    for (std::size_t f = 0; f < buf.frames(); ++f) {
        for (const auto& ch : buf.channels) {
            const double v = ch[f];
            std::uint32_t u = 0;
            if (flt) {
                const float x = static_cast<float>(std::clamp(v, -1.0, 1.0));
                std::memcpy(&u, &x, 4);
            } else {
                const double s = std::clamp(std::nearbyint(v * scale), lo, hi);
                u = static_cast<std::uint32_t>(static_cast<std::int32_t>(s));
            }
            for (int b = 0; b < bytes; ++b) out += static_cast<char>((u >> (8 * b)) & 0xff);
        }
    }

    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::Io, "cannot write '" + file.string() + "'");
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) fail(ErrorCode::Io, "write error on '" + file.string() + "'");
}

}  // namespace audvault
