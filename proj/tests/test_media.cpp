#include "audvault/digest.hpp"
#include "audvault/error.hpp"
#include "audvault/flavour.hpp"
#include "audvault/tempdir.hpp"
#include "audvault/wav.hpp"
#include "audvault/zip.hpp"

#include "audvault/database.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <zlib.h>

#include <cmath>

using namespace audvault;
using namespace testing_support;

namespace {

void le16(std::string& s, unsigned v) {
    s += static_cast<char>(v & 0xff);
    s += static_cast<char>((v >> 8) & 0xff);
}
void le32(std::string& s, unsigned long v) {
    le16(s, v & 0xffff);
    le16(s, (v >> 16) & 0xffff);
}

// Single stored member with an arbitrary name, built by hand.
std::string stored_zip(const std::string& name, const std::string& data) {
    const unsigned long crc = crc32(0, reinterpret_cast<const Bytef*>(data.data()), data.size());
    std::string z;
    le32(z, 0x04034b50);
    le16(z, 20);
    le16(z, 0);
    le16(z, 0);
    le32(z, 0);
    le32(z, crc);
    le32(z, data.size());
    le32(z, data.size());
    le16(z, name.size());
    le16(z, 0);
    z += name + data;
    const std::size_t cd = z.size();
    le32(z, 0x02014b50);
    le16(z, 20);
    le16(z, 20);
    le16(z, 0);
    le16(z, 0);
    le32(z, 0);
    le32(z, crc);
    le32(z, data.size());
    le32(z, data.size());
    le16(z, name.size());
    for (int i = 0; i < 4; ++i) le16(z, 0);
    le32(z, 0);
    le32(z, 0);
    z += name;
    const std::size_t cd_size = z.size() - cd;
    le32(z, 0x06054b50);
    le16(z, 0);
    le16(z, 0);
    le16(z, 1);
    le16(z, 1);
    le32(z, cd_size);
    le32(z, cd);
    le16(z, 0);
    return z;
}

double rms(const std::vector<double>& v, std::size_t from, std::size_t to) {
    double s = 0;
    for (std::size_t i = from; i < to; ++i) s += v[i] * v[i];
    return std::sqrt(s / static_cast<double>(to - from));
}

AudioBuffer sine(int rate, double freq, double amp, std::size_t frames) {
    AudioBuffer b;
    b.sampling_rate = rate;
    b.channels.emplace_back(frames);
    for (std::size_t i = 0; i < frames; ++i) b.channels[0][i] = amp * std::sin(2 * M_PI * freq * i / rate);
    return b;
}

}  // namespace

TEST(Zip, DeterministicAndRoundTrip) {
    TempDir dir;
    const fs::path src = dir.path() / "src";
    write_file(src / "b.txt", std::string(5000, 'x'));
    write_file(src / "sub/a.bin", "\x01\x02\x03");
    write_file(src / "empty", "");
    const std::vector<std::string> files = {"sub/a.bin", "b.txt", "empty"};
    zip_create(files, src, dir.path() / "one.zip");
    zip_create({"empty", "b.txt", "sub/a.bin"}, src, dir.path() / "two.zip");
    EXPECT_EQ(read_file(dir.path() / "one.zip"), read_file(dir.path() / "two.zip"));
    EXPECT_EQ(zip_list(dir.path() / "one.zip"), (std::vector<std::string>{"b.txt", "empty", "sub/a.bin"}));
    // compressible member is deflated
    EXPECT_LT(fs::file_size(dir.path() / "one.zip"), 1000u);
    const auto members = zip_extract(dir.path() / "one.zip", dir.path() / "out");
    EXPECT_EQ(members.size(), 3u);
    EXPECT_EQ(snapshot_tree(dir.path() / "out"), snapshot_tree(src));
}

TEST(Zip, ReadableByHandBuiltArchive) {
    TempDir dir;
    write_file(dir.path() / "ok.zip", stored_zip("x/y.txt", "hello"));
    EXPECT_EQ(zip_extract(dir.path() / "ok.zip", dir.path() / "out"), std::vector<std::string>{"x/y.txt"});
    EXPECT_EQ(read_file(dir.path() / "out/x/y.txt"), "hello");
}

TEST(Zip, RejectsUnsafeNames) {
    TempDir dir;
    for (const char* name : {"../x", "/abs", "a/../../x", "a\\b"}) {
        write_file(dir.path() / "bad.zip", stored_zip(name, "evil"));
        try {
            zip_extract(dir.path() / "bad.zip", dir.path() / "out");
            ADD_FAILURE() << name;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::Corrupt) << name;
        }
        EXPECT_FALSE(fs::exists(dir.path() / "x"));
    }
}

TEST(Zip, DetectsCorruption) {
    TempDir dir;
    std::string z = stored_zip("a.txt", "hello world");
    z[30 + 5 + 2] ^= 0x20;  // flip a data byte
    write_file(dir.path() / "c.zip", z);
    EXPECT_THROW(zip_extract(dir.path() / "c.zip", dir.path() / "out"), Error);
    write_file(dir.path() / "t.zip", z.substr(0, 20));
    EXPECT_THROW(zip_extract(dir.path() / "t.zip", dir.path() / "out"), Error);
}

TEST(Wav, RoundTripDepths) {
    TempDir dir;
    const AudioBuffer b = tone(16000, 2, 1000, 3);
    for (int bits : {16, 24, 32}) {
        const fs::path f = dir.path() / ("t" + std::to_string(bits) + ".wav");
        write_wav(b, bits, f);
        EXPECT_EQ(fs::file_size(f), 44u + 1000u * 2 * bits / 8);
        const MediaInfo info = scan_media(f);
        EXPECT_EQ(info, (MediaInfo{bits, 2, 16000, Duration::from_ms(62) + Duration::from_ns(500'000)}));
        const AudioBuffer r = read_wav(f);
        ASSERT_EQ(r.frames(), 1000u);
        const double tol = 1.0 / std::pow(2.0, bits - 1);
        for (int c = 0; c < 2; ++c) {
            for (std::size_t i = 0; i < 1000; ++i) ASSERT_NEAR(r.channels[c][i], b.channels[c][i], tol);
        }
    }
    write_wav(b, 32, dir.path() / "f.wav", SampleFormat::Float);
    const AudioBuffer r = read_wav(dir.path() / "f.wav");
    EXPECT_EQ(r.source_format, SampleFormat::Float);
    EXPECT_NEAR(r.channels[1][7], b.channels[1][7], 1e-7);
}

TEST(Wav, RejectsBadInput) {
    TempDir dir;
    write_file(dir.path() / "x.wav", "not a wave file at all, sorry");
    EXPECT_THROW(scan_media(dir.path() / "x.wav"), Error);
    write_tone(dir.path() / "t.wav", 8000, 1, 100, 1);
    const std::string full = read_file(dir.path() / "t.wav");
    write_file(dir.path() / "cut.wav", full.substr(0, 40));
    try {
        scan_media(dir.path() / "cut.wav");
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Corrupt);
    }
}

TEST(Wav, ClipsOutOfRange) {
    TempDir dir;
    AudioBuffer b;
    b.sampling_rate = 8000;
    b.channels = {{2.0, -2.0, 0.0}};
    write_wav(b, 16, dir.path() / "c.wav");
    const AudioBuffer r = read_wav(dir.path() / "c.wav");
    EXPECT_NEAR(r.channels[0][0], 32767.0 / 32768.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.channels[0][1], -1.0);
}

TEST(Resample, PreservesDc) {
    AudioBuffer b;
    b.sampling_rate = 16000;
    b.channels = {std::vector<double>(16000, 0.5)};
    for (int target : {8000, 22050, 44100, 11025}) {
        const AudioBuffer r = resample(b, target);
        EXPECT_EQ(r.frames(), static_cast<std::size_t>(std::lround(16000.0 * target / 16000)));
        for (double v : r.channels[0]) ASSERT_NEAR(v, 0.5, 1e-9);
    }
}

TEST(Resample, PassbandAndStopband) {
    // 440 Hz survives 16 kHz -> 8 kHz with its analytic RMS of A / sqrt(2)
    const AudioBuffer in = sine(16000, 440, 0.5, 16000);
    const AudioBuffer r = resample(in, 8000);
    ASSERT_EQ(r.frames(), 8000u);
    EXPECT_NEAR(rms(r.channels[0], 200, 7800), 0.5 / std::sqrt(2.0), 0.005);
    // 6 kHz lies above the new Nyquist frequency and must be suppressed
    const AudioBuffer alias = resample(sine(16000, 6000, 0.5, 16000), 8000);
    EXPECT_LT(rms(alias.channels[0], 200, 7800), 0.5 / std::sqrt(2.0) * 1e-3);
    // upsampling keeps the tone
    const AudioBuffer up = resample(sine(8000, 440, 0.5, 8000), 16000);
    EXPECT_NEAR(rms(up.channels[0], 400, 15600), 0.5 / std::sqrt(2.0), 0.005);
    // equal rates copy
    EXPECT_EQ(resample(in, 16000).channels, in.channels);
}

TEST(Remix, SelectionAndMixdown) {
    AudioBuffer b;
    b.sampling_rate = 8000;
    b.channels = {{0.2, 0.2}, {0.4, 0.6}};
    const AudioBuffer m = remix(b, std::nullopt, true);
    ASSERT_EQ(m.channel_count(), 1u);
    EXPECT_NEAR(m.channels[0][0], 0.3, 1e-12);
    EXPECT_NEAR(m.channels[0][1], 0.4, 1e-12);
    const AudioBuffer s = remix(b, std::vector<int>{1, 0, 1}, false);
    ASSERT_EQ(s.channel_count(), 3u);
    EXPECT_EQ(s.channels[0], b.channels[1]);
    EXPECT_EQ(s.channels[1], b.channels[0]);
    EXPECT_THROW(remix(b, std::vector<int>{2}, false), Error);
}

TEST(Flavour, Ids) {
    EXPECT_EQ(flavour_id(Flavour{}), "raw");
    Flavour a;
    a.sampling_rate = 8000;
    Flavour b = a;
    b.mixdown = true;
    EXPECT_EQ(flavour_id(a).size(), 8u);
    EXPECT_EQ(flavour_id(a), flavour_id(a));
    EXPECT_NE(flavour_id(a), flavour_id(b));
    EXPECT_NE(flavour_id(a), "raw");
}

TEST(Flavour, Validation) {
    Flavour f;
    f.bit_depth = 12;
    EXPECT_THROW(validate_flavour(f), Error);
    f = {};
    f.sampling_rate = 0;
    EXPECT_THROW(validate_flavour(f), Error);
    f = {};
    f.format = "flac";
    EXPECT_THROW(validate_flavour(f), Error);
    f = {};
    f.channels = std::vector<int>{-1};
    EXPECT_THROW(validate_flavour(f), Error);
    f = {};
    f.bit_depth = 24;
    f.mixdown = true;
    EXPECT_NO_THROW(validate_flavour(f));
}

TEST(Flavour, ConvertStereoToNarrowbandMono) {
    TempDir dir;
    write_dc(dir.path() / "dc.wav", 16000, 2, 16000, 0.25);
    Flavour f;
    f.sampling_rate = 8000;
    f.mixdown = true;
    f.bit_depth = 16;
    const MediaInfo info = convert(dir.path() / "dc.wav", f, dir.path() / "out.wav");
    EXPECT_EQ(info, scan_media(dir.path() / "out.wav"));
    EXPECT_EQ(info.bit_depth, 16);
    EXPECT_EQ(info.channels, 1);
    EXPECT_EQ(info.sampling_rate, 8000);
    EXPECT_EQ(info.duration, Duration::from_seconds(1));
    const AudioBuffer r = read_wav(dir.path() / "out.wav");
    for (double v : r.channels[0]) ASSERT_NEAR(v, 0.25, 1e-3);
    EXPECT_TRUE(conforms(info, f));
    EXPECT_FALSE(conforms(scan_media(dir.path() / "dc.wav"), f));
}

TEST(Flavour, ConformingFileIsCopied) {
    TempDir dir;
    write_tone(dir.path() / "a.wav", 8000, 1, 800, 9);
    Flavour f;
    f.sampling_rate = 8000;
    f.channels = std::vector<int>{0};
    convert(dir.path() / "a.wav", f, dir.path() / "b.wav");
    EXPECT_EQ(file_digest(dir.path() / "a.wav"), file_digest(dir.path() / "b.wav"));
    Flavour deeper;
    deeper.bit_depth = 24;
    convert(dir.path() / "a.wav", deeper, dir.path() / "c.wav");
    EXPECT_EQ(scan_media(dir.path() / "c.wav").bit_depth, 24);
}
