#include "audvault/snapshot.hpp"

#include "audvault/database.hpp"
#include "audvault/error.hpp"
#include "audvault/tempdir.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace audvault {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'A', 'V', 'S', 'N', 'A', 'P', '\r', '\n'};

class Writer {
public:
    void u8(std::uint8_t v) { buf_ += static_cast<char>(v); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i64(std::int64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s.data(), s.size());
    }
    void opt(const std::optional<std::string>& s) {
        u8(s ? 1 : 0);
        if (s) str(*s);
    }
    std::string& bytes() { return buf_; }

private:
    // Little-endian hosts only; the format tag guards against anything else.
    void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view b) : b_(b) {}

    bool ok() const { return ok_; }
    std::uint8_t u8() {
        std::uint8_t v = 0;
        raw(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        raw(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        raw(&v, 8);
        return v;
    }
    std::int64_t i64() {
        std::int64_t v = 0;
        raw(&v, 8);
        return v;
    }
    double f64() {
        double v = 0;
        raw(&v, 8);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        if (!ok_ || n > b_.size() - pos_) {
            ok_ = false;
            return {};
        }
        std::string s(b_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::optional<std::string> opt() {
        if (u8() == 0) return std::nullopt;
        return str();
    }

private:
    void raw(void* p, std::size_t n) {
        if (!ok_ || n > b_.size() - pos_) {
            ok_ = false;
            return;
        }
        std::memcpy(p, b_.data() + pos_, n);
        pos_ += n;
    }
    std::string_view b_;
    std::size_t pos_ = 0;
    bool ok_ = true;
};

// Storage tag of a column: the variant index shared by all present values.
std::uint8_t storage_tag(const std::vector<Value>& values) {
    for (const auto& v : values) {
        if (!is_missing(v)) return static_cast<std::uint8_t>(v.index());
    }
    return 0;
}

void encode_values(Writer& w, const std::vector<Value>& values) {
    const std::uint8_t tag = storage_tag(values);
    w.u8(tag);
    for (const auto& v : values) w.u8(is_missing(v) ? 0 : 1);
    for (const auto& v : values) {
        if (is_missing(v)) continue;
        if (v.index() != tag) fail(ErrorCode::InvalidArgument, "snapshot column mixes value types");
        switch (tag) {
        case 1: w.u8(std::get<bool>(v) ? 1 : 0); break;
        case 2: w.i64(std::get<std::int64_t>(v)); break;
        case 3: w.f64(std::get<double>(v)); break;
        case 4: w.str(std::get<std::string>(v)); break;
        case 5: w.i64(std::get<Date>(v).ns); break;
        case 6: w.i64(std::get<Duration>(v).ns); break;
        default: break;
        }
    }
}

bool decode_values(Reader& r, std::size_t rows, std::vector<Value>& out) {
    const std::uint8_t tag = r.u8();
    if (tag > 6) return false;
    std::vector<std::uint8_t> present(rows);
    for (std::size_t i = 0; i < rows; ++i) present[i] = r.u8();
    if (!r.ok()) return false;
    out.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!present[i]) continue;
        switch (tag) {
        case 1: out[i] = r.u8() != 0; break;
        case 2: out[i] = r.i64(); break;
        case 3: out[i] = r.f64(); break;
        case 4: out[i] = r.str(); break;
        case 5: out[i] = Date{r.i64()}; break;
        case 6: out[i] = Duration{r.i64()}; break;
        default: return false;
        }
    }
    return r.ok();
}

}  // namespace

std::string encode_snapshot(const Table& t, const std::string& source_digest, std::uint32_t format_tag) {
    Writer w;
    w.bytes().append(kMagic, sizeof kMagic);
    w.u32(format_tag);
    w.str(source_digest);
    w.str(t.id());
    w.opt(t.split_id());
    const Index& idx = t.index();
    w.u8(static_cast<std::uint8_t>(idx.kind));
    w.u32(static_cast<std::uint32_t>(idx.levels.size()));
    for (const auto& l : idx.levels) {
        w.str(l.name);
        w.u8(static_cast<std::uint8_t>(l.dtype));
    }
    w.u64(idx.size());
    w.u32(static_cast<std::uint32_t>(t.columns().size()));
    for (const auto& c : t.columns()) {
        w.str(c.id);
        w.opt(c.scheme_id);
        w.opt(c.rater_id);
    }
    for (const auto& level : idx.columns) encode_values(w, level);
    for (const auto& c : t.columns()) encode_values(w, c.values);
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(w.bytes().data()), static_cast<uInt>(w.bytes().size())));
    w.u32(crc);
    return std::move(w.bytes());
}

std::optional<Table> decode_snapshot(std::string_view bytes, const std::string& source_digest,
                                     std::uint32_t format_tag) {
    if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        return std::nullopt;
    }
    const std::string_view body = bytes.substr(0, bytes.size() - 4);
    std::uint32_t stored_crc = 0;
    std::memcpy(&stored_crc, bytes.data() + body.size(), 4);
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
    if (crc != stored_crc) return std::nullopt;

    Reader r(body.substr(sizeof kMagic));
    if (r.u32() != format_tag) return std::nullopt;
    if (r.str() != source_digest) return std::nullopt;
    std::string id = r.str();
    std::optional<std::string> split = r.opt();
    Index idx;
    const std::uint8_t kind = r.u8();
    if (kind > 2) return std::nullopt;
    idx.kind = static_cast<IndexKind>(kind);
    const std::uint32_t nlevels = r.u32();
    if (!r.ok() || nlevels > 1024) return std::nullopt;
    for (std::uint32_t i = 0; i < nlevels; ++i) {
        IndexLevel l;
        l.name = r.str();
        const std::uint8_t dt = r.u8();
        if (dt > static_cast<std::uint8_t>(DType::Time)) return std::nullopt;
        l.dtype = static_cast<DType>(dt);
        idx.levels.push_back(std::move(l));
    }
    const std::uint64_t rows = r.u64();
    const std::uint32_t ncols = r.u32();
    if (!r.ok() || rows > body.size() || ncols > 65536) return std::nullopt;
    std::vector<Column> columns(ncols);
    for (auto& c : columns) {
        c.id = r.str();
        c.scheme_id = r.opt();
        c.rater_id = r.opt();
    }
    idx.columns.resize(nlevels);
    for (auto& level : idx.columns) {
        if (!decode_values(r, rows, level)) return std::nullopt;
    }
    for (auto& c : columns) {
        if (!decode_values(r, rows, c.values)) return std::nullopt;
    }
    if (!r.ok()) return std::nullopt;
    return Table::trusted(std::move(id), std::move(idx), std::move(columns), std::move(split));
}

void write_snapshot(const Table& t, const std::string& source_digest, const fs::path& file, std::uint32_t format_tag) {
    atomic_write(file, encode_snapshot(t, source_digest, format_tag));
}

std::optional<Table> read_snapshot(const fs::path& file, const std::string& source_digest, std::uint32_t format_tag) {
    std::ifstream in(file, std::ios::binary | std::ios::ate);
    if (!in) return std::nullopt;
    std::string bytes(static_cast<std::size_t>(in.tellg()), '\0');
    in.seekg(0);
    if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) return std::nullopt;
    return decode_snapshot(bytes, source_digest, format_tag);
}

}  // namespace audvault
