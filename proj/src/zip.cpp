#include "audvault/zip.hpp"

#include "audvault/error.hpp"
#include "audvault/path_util.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace audvault {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kUtf8Flag = 0x0800;
constexpr std::size_t kChunk = 1 << 16;

void put16(std::string& s, std::uint16_t v) {
    s += static_cast<char>(v & 0xff);
    s += static_cast<char>(v >> 8);
}
void put32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}
std::uint16_t get16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t get32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct Member {
    std::string name;
    std::uint16_t method = 0;
    std::uint32_t crc = 0;
    std::uint64_t compressed = 0;
    std::uint64_t size = 0;
    std::uint64_t offset = 0;
};

std::string local_header(const Member& m) {
    std::string h;
    put32(h, kLocalSig);
    put16(h, 20);
    put16(h, kUtf8Flag);
    put16(h, m.method);
    put16(h, 0);  // time
    put16(h, 0);  // date
    put32(h, m.crc);
    put32(h, static_cast<std::uint32_t>(m.compressed));
    put32(h, static_cast<std::uint32_t>(m.size));
    put16(h, static_cast<std::uint16_t>(m.name.size()));
    put16(h, 0);
    h += m.name;
    return h;
}

void write_all(std::fstream& out, const char* data, std::size_t n) {
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) fail(ErrorCode::Io, "ZIP write failed");
}

// Streams `src` into `out` at the current position; returns bytes written.
std::uint64_t store(std::ifstream& src, std::fstream& out) {
    std::array<char, kChunk> buf{};
    std::uint64_t total = 0;
    while (src) {
        src.read(buf.data(), buf.size());
        const auto n = static_cast<std::size_t>(src.gcount());
        if (n == 0) break;
        write_all(out, buf.data(), n);
        total += n;
    }
    return total;
}

std::uint64_t deflate_stream(std::ifstream& src, std::fstream& out, std::uint32_t& crc, std::uint64_t& size) {
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        fail(ErrorCode::Io, "deflate initialisation failed");
    }
    std::array<unsigned char, kChunk> in{};
    std::array<unsigned char, kChunk> obuf{};
    std::uint64_t written = 0;
    crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
    size = 0;
    int flush = Z_NO_FLUSH;
    do {
        src.read(reinterpret_cast<char*>(in.data()), in.size());
        const auto n = static_cast<uInt>(src.gcount());
        crc = static_cast<std::uint32_t>(crc32(crc, in.data(), n));
        size += n;
        flush = src ? Z_NO_FLUSH : Z_FINISH;
        zs.next_in = in.data();
        zs.avail_in = n;
        do {
            zs.next_out = obuf.data();
            zs.avail_out = static_cast<uInt>(obuf.size());
            deflate(&zs, flush);
            const std::size_t have = obuf.size() - zs.avail_out;
            write_all(out, reinterpret_cast<const char*>(obuf.data()), have);
            written += have;
        } while (zs.avail_out == 0);
    } while (flush != Z_FINISH);
    deflateEnd(&zs);
    return written;
}

}  // namespace

void zip_create(const std::vector<std::string>& files, const fs::path& root, const fs::path& out_path) {
    std::vector<std::string> names = files;
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());

    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    std::fstream out(out_path, std::ios::binary | std::ios::in | std::ios::out | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot create '" + out_path.string() + "'");

    std::vector<Member> members;
    std::uint64_t pos = 0;
    for (const auto& name : names) {
        if (!is_safe_relative_path(name)) fail(ErrorCode::InvalidArgument, "unsafe archive member name '" + name + "'");
        const fs::path src_path = root / name;
        std::ifstream src(src_path, std::ios::binary);
        if (!src) fail(ErrorCode::NotFound, "cannot open '" + src_path.string() + "'");

        Member m;
        m.name = name;
        m.offset = pos;
        const std::string placeholder = local_header(m);
        write_all(out, placeholder.data(), placeholder.size());
        const std::uint64_t data_start = pos + placeholder.size();

        m.method = Z_DEFLATED;
        m.compressed = deflate_stream(src, out, m.crc, m.size);
        if (m.compressed >= m.size) {
            // Stored is never larger, so it fits over the deflated bytes.
            out.seekp(static_cast<std::streamoff>(data_start));
            std::ifstream again(src_path, std::ios::binary);
            m.method = 0;
            m.compressed = store(again, out);
        }
        if (m.size > 0xFFFFFFFEULL) fail(ErrorCode::InvalidArgument, "'" + name + "' is too large for ZIP32");
        pos = data_start + m.compressed;

        out.seekp(static_cast<std::streamoff>(m.offset));
        const std::string header = local_header(m);
        write_all(out, header.data(), header.size());
        out.seekp(static_cast<std::streamoff>(pos));
        members.push_back(std::move(m));
    }

    std::string central;
    for (const auto& m : members) {
        put32(central, kCentralSig);
        put16(central, 20);  // made by
        put16(central, 20);  // needed
        put16(central, kUtf8Flag);
        put16(central, m.method);
        put16(central, 0);
        put16(central, 0);
        put32(central, m.crc);
        put32(central, static_cast<std::uint32_t>(m.compressed));
        put32(central, static_cast<std::uint32_t>(m.size));
        put16(central, static_cast<std::uint16_t>(m.name.size()));
        put16(central, 0);  // extra
        put16(central, 0);  // comment
        put16(central, 0);  // disk
        put16(central, 0);  // internal attrs
        put32(central, 0);  // external attrs
        put32(central, static_cast<std::uint32_t>(m.offset));
        central += m.name;
    }
    const std::size_t dir_size = central.size();
    put32(central, kEndSig);
    put16(central, 0);
    put16(central, 0);
    put16(central, static_cast<std::uint16_t>(members.size()));
    put16(central, static_cast<std::uint16_t>(members.size()));
    put32(central, static_cast<std::uint32_t>(dir_size));
    put32(central, static_cast<std::uint32_t>(pos));
    put16(central, 0);
    write_all(out, central.data(), central.size());
    out.close();
    fs::resize_file(out_path, pos + central.size());
}

namespace {

std::vector<Member> read_directory(std::ifstream& in, const fs::path& archive) {
    const std::string name = archive.string();
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(in.tellg());
    if (file_size < 22) fail(ErrorCode::Corrupt, "'" + name + "' is not a ZIP archive");
    const std::uint64_t tail = std::min<std::uint64_t>(file_size, 22 + 0xFFFF);
    std::vector<unsigned char> buf(tail);
    in.seekg(static_cast<std::streamoff>(file_size - tail));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(tail));
    std::int64_t eocd = -1;
    for (std::int64_t i = static_cast<std::int64_t>(tail) - 22; i >= 0; --i) {
        if (get32(&buf[i]) == kEndSig) {
            eocd = i;
            break;
        }
    }
    if (eocd < 0) fail(ErrorCode::Corrupt, "'" + name + "' has no ZIP end record");
    const unsigned char* e = &buf[eocd];
    const std::uint16_t count = get16(e + 10);
    const std::uint32_t dir_size = get32(e + 12);
    const std::uint32_t dir_offset = get32(e + 16);
    if (static_cast<std::uint64_t>(dir_offset) + dir_size > file_size) {
        fail(ErrorCode::Corrupt, "'" + name + "' has a truncated central directory");
    }
    std::vector<unsigned char> dir(dir_size);
    in.seekg(dir_offset);
    in.read(reinterpret_cast<char*>(dir.data()), dir_size);

    std::vector<Member> members;
    std::size_t p = 0;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (p + 46 > dir.size() || get32(&dir[p]) != kCentralSig) {
            fail(ErrorCode::Corrupt, "'" + name + "' has a malformed central directory");
        }
        Member m;
        m.method = get16(&dir[p + 10]);
        m.crc = get32(&dir[p + 16]);
        m.compressed = get32(&dir[p + 20]);
        m.size = get32(&dir[p + 24]);
        const std::uint16_t name_len = get16(&dir[p + 28]);
        const std::uint16_t extra_len = get16(&dir[p + 30]);
        const std::uint16_t comment_len = get16(&dir[p + 32]);
        m.offset = get32(&dir[p + 42]);
        if (p + 46 + name_len > dir.size()) fail(ErrorCode::Corrupt, "'" + name + "' has a truncated entry name");
        m.name.assign(reinterpret_cast<const char*>(&dir[p + 46]), name_len);
        p += 46 + name_len + extra_len + comment_len;
        members.push_back(std::move(m));
    }
    return members;
}

void extract_member(std::ifstream& in, const Member& m, const fs::path& target, const std::string& archive) {
    std::array<unsigned char, 30> lh{};
    in.seekg(static_cast<std::streamoff>(m.offset));
    if (!in.read(reinterpret_cast<char*>(lh.data()), lh.size()) || get32(lh.data()) != kLocalSig) {
        fail(ErrorCode::Corrupt, "'" + archive + "': bad local header for '" + m.name + "'");
    }
    const std::uint64_t data = m.offset + 30 + get16(&lh[26]) + get16(&lh[28]);
    in.seekg(static_cast<std::streamoff>(data));

    fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".part";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + tmp.string() + "'");

    std::array<unsigned char, kChunk> ibuf{};
    std::array<unsigned char, kChunk> obuf{};
    std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
    std::uint64_t produced = 0;
    std::uint64_t remaining = m.compressed;
    auto emit = [&](const unsigned char* p, std::size_t n) {
        crc = static_cast<std::uint32_t>(crc32(crc, p, static_cast<uInt>(n)));
        produced += n;
        out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    if (m.method == 0) {
        while (remaining > 0) {
            const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, ibuf.size()));
            if (!in.read(reinterpret_cast<char*>(ibuf.data()), static_cast<std::streamsize>(n))) break;
            emit(ibuf.data(), n);
            remaining -= n;
        }
    } else if (m.method == Z_DEFLATED) {
        z_stream zs{};
        if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) fail(ErrorCode::Io, "inflate initialisation failed");
        int ret = Z_OK;
        while (ret != Z_STREAM_END && remaining > 0) {
            const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, ibuf.size()));
            if (!in.read(reinterpret_cast<char*>(ibuf.data()), static_cast<std::streamsize>(n))) break;
            remaining -= n;
            zs.next_in = ibuf.data();
            zs.avail_in = static_cast<uInt>(n);
            do {
                zs.next_out = obuf.data();
                zs.avail_out = static_cast<uInt>(obuf.size());
                ret = inflate(&zs, Z_NO_FLUSH);
                if (ret != Z_OK && ret != Z_STREAM_END && ret != Z_BUF_ERROR) {
                    inflateEnd(&zs);
                    out.close();
                    fs::remove(tmp);
                    fail(ErrorCode::Corrupt, "'" + archive + "': corrupt deflate data in '" + m.name + "'");
                }
                emit(obuf.data(), obuf.size() - zs.avail_out);
            } while (zs.avail_out == 0);
        }
        inflateEnd(&zs);
    } else {
        out.close();
        fs::remove(tmp);
        fail(ErrorCode::Corrupt, "'" + archive + "': unsupported compression method " + std::to_string(m.method));
    }
    out.close();
    if (!out || produced != m.size || crc != m.crc) {
        fs::remove(tmp);
        fail(ErrorCode::Corrupt, "'" + archive + "': CRC or size mismatch in '" + m.name + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace

std::vector<std::string> zip_list(const fs::path& archive) {
    std::ifstream in(archive, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot open '" + archive.string() + "'");
    std::vector<std::string> names;
    for (const auto& m : read_directory(in, archive)) names.push_back(m.name);
    return names;
}

std::vector<std::string> zip_extract(const fs::path& archive, const fs::path& dest) {
    std::ifstream in(archive, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot open '" + archive.string() + "'");
    const auto members = read_directory(in, archive);
    for (const auto& m : members) {
        if (!is_safe_relative_path(m.name)) {
            fail(ErrorCode::Corrupt, "'" + archive.string() + "': refusing unsafe member path '" + m.name + "'");
        }
    }
    std::vector<std::string> names;
    for (const auto& m : members) {
        extract_member(in, m, dest / m.name, archive.string());
        names.push_back(m.name);
    }
    return names;
}

}  // namespace audvault
