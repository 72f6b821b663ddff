#include "audvault/csv.hpp"
#include "audvault/database.hpp"
#include "audvault/digest.hpp"
#include "audvault/duration.hpp"
#include "audvault/error.hpp"
#include "audvault/header.hpp"
#include "audvault/table.hpp"
#include "audvault/value.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace audvault;

namespace {

Value str(const char* s) { return Value(std::string(s)); }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Io;
}

const char* kEmodbYaml = R"(name: emodb
source: http://emodb.bilderbar.info
usage: research
languages: [deu]
schemes:
  emotion:
    dtype: str
    labels: [happy, angry, neutral]
tables:
  emotion:
    type: filewise
    columns:
      emotion:
        scheme_id: emotion
)";

}  // namespace

// RFC 1321 appendix A.5 test suite.
TEST(Digest, KnownVectors) {
    EXPECT_EQ(compute_digest(""), "d41d8cd98f00b204e9800998ecf8427e");
    EXPECT_EQ(compute_digest("a"), "0cc175b9c0f1b6a831c399e269772661");
    EXPECT_EQ(compute_digest("abc"), "900150983cd24fb0d6963f7d28e17f72");
    EXPECT_EQ(compute_digest("message digest"), "f96b697d7cb7938d525a2f31aaf161d0");
    EXPECT_EQ(compute_digest("abcdefghijklmnopqrstuvwxyz"), "c3fcd3d76192e4007dfb496cca67e13b");
    EXPECT_EQ(compute_digest("12345678901234567890123456789012345678901234567890123456789012345678901234567890"),
              "57edf4a22be3c955ac49da2e2107b67a");
}

TEST(Digest, StreamMatchesBuffer) {
    std::string big(300000, '\0');
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<char>(i * 31);
    std::istringstream in(big);
    EXPECT_EQ(compute_digest(in), compute_digest(big));
}

TEST(Duration, ParsesBothForms) {
    EXPECT_EQ(parse_duration("0"), Duration{});
    EXPECT_EQ(parse_duration("0 days 00:00:01.0"), Duration::from_seconds(1));
    EXPECT_EQ(parse_duration("0 days 00:00:03.3"), Duration::from_ms(3300));
    EXPECT_EQ(parse_duration("1 day 02:00:00"), Duration::from_seconds(26 * 3600));
    EXPECT_EQ(parse_duration("3.25"), Duration::from_ms(3250));
    EXPECT_EQ(parse_duration("00:01:00"), Duration::from_seconds(60));
    EXPECT_EQ(parse_duration("0.000000001"), Duration::from_ns(1));
    for (const char* bad : {"", "x", "1 days", "00:61:00", "1.2.3", "."}) {
        EXPECT_THROW(parse_duration(bad), Error) << bad;
    }
}

TEST(Duration, FormatIsIdempotent) {
    EXPECT_EQ(format_duration(Duration::from_seconds(1)), "0 days 00:00:01");
    EXPECT_EQ(format_duration(Duration::from_ms(3300)), "0 days 00:00:03.3");
    EXPECT_EQ(format_duration(Duration::from_seconds(90061)), "1 days 01:01:01");
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        const Duration d = Duration::from_ns(static_cast<std::int64_t>(rng() % 400'000'000'000'000ULL));
        const std::string s = format_duration(d);
        EXPECT_EQ(parse_duration(s), d) << s;
        EXPECT_EQ(format_duration(parse_duration(s)), s);
    }
}

TEST(Value, ParseAndFormat) {
    EXPECT_EQ(parse_value("29", DType::Integer), Value(std::int64_t{29}));
    EXPECT_EQ(parse_value("True", DType::Bool), Value(true));
    EXPECT_EQ(parse_value("0", DType::Bool), Value(false));
    EXPECT_EQ(format_value(Value(2.0)), "2.0");
    EXPECT_EQ(format_value(Value(0.1)), "0.1");
    EXPECT_EQ(parse_value("2021-03-04", DType::Date), Value(parse_date("2021-03-04")));
    EXPECT_THROW(parse_value("abc", DType::Integer), Error);
    EXPECT_THROW(parse_value("nan", DType::Float), Error);
    EXPECT_EQ(parse_dtype("str"), DType::String);
    EXPECT_EQ(parse_dtype("int"), DType::Integer);
    EXPECT_THROW(parse_dtype("complex"), Error);
}

TEST(Header, ParsesEmodb) {
    const Header h = parse_header(kEmodbYaml);
    EXPECT_EQ(h.name, "emodb");
    EXPECT_EQ(h.usage, "research");
    ASSERT_TRUE(h.schemes.at("emotion").labels);
    EXPECT_EQ(h.schemes.at("emotion").labels->size(), 3u);
    EXPECT_EQ(h.schemes.at("emotion").dtype, DType::String);
    EXPECT_EQ(h.tables.at("emotion").kind, IndexKind::Filewise);
}

TEST(Header, MandatoryFields) {
    std::string y = kEmodbYaml;
    y.replace(0, y.find('\n'), "name: \"\"");
    EXPECT_EQ(code_of([&] { parse_header(y); }), ErrorCode::Validation);
    EXPECT_EQ(code_of([] { parse_header("source: x\nusage: research\n"); }), ErrorCode::Validation);
}

TEST(Header, DanglingReferences) {
    std::string y = kEmodbYaml;
    y.replace(y.find("scheme_id: emotion"), 18, "scheme_id: nope");
    EXPECT_EQ(code_of([&] { parse_header(y); }), ErrorCode::Validation);
    std::string z = kEmodbYaml;
    z.replace(z.find("dtype: str"), 10, "dtype: blob");
    EXPECT_EQ(code_of([&] { parse_header(z); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { parse_header("name: [unclosed\n"); }), ErrorCode::InvalidArgument);
}

TEST(Header, SchemeRules) {
    Header h = parse_header(kEmodbYaml);
    Scheme bad;
    bad.dtype = DType::String;
    bad.minimum = 0;
    h.schemes["s"] = bad;
    EXPECT_THROW(validate_header(h), Error);
    Scheme inverted;
    inverted.dtype = DType::Integer;
    inverted.minimum = 5;
    inverted.maximum = 1;
    h.schemes["s"] = inverted;
    EXPECT_THROW(validate_header(h), Error);
    Scheme misc;
    misc.dtype = DType::String;
    misc.labels_table = "speakers";
    h.schemes["s"] = misc;
    EXPECT_THROW(validate_header(h), Error);  // no such misc table
}

TEST(Header, MinimalDocumentHasMandatoryKeys) {
    Header h;
    h.name = "x";
    h.source = "s";
    h.usage = "research";
    const std::string doc = serialize_header(h);
    for (const char* k : {"name: x", "source: s", "usage: research"}) EXPECT_NE(doc.find(k), std::string::npos);
}

TEST(Header, ExpiresSerialized) {
    Header h = parse_header(kEmodbYaml);
    h.expires = parse_date("2030-01-31");
    const std::string doc = serialize_header(h);
    EXPECT_NE(doc.find("expires: 2030-01-31"), std::string::npos);
    EXPECT_EQ(parse_header(doc), h);
}

namespace {

std::string random_text(std::mt19937& rng) {
    static const std::vector<std::string> parts = {"a", "b", "Z", " ", ",", "\"", "\n", "ä", "x y", "-", "1", ":"};
    std::string s;
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) s += parts[rng() % parts.size()];
    return s;
}

std::string random_id(std::mt19937& rng, const char* prefix) { return prefix + std::to_string(rng() % 1000); }

Value random_value(std::mt19937& rng, DType t) {
    switch (t) {
    case DType::Bool: return Value(rng() % 2 == 0);
    case DType::Integer: return Value(static_cast<std::int64_t>(rng()) - (1ll << 31));
    case DType::Float: {
        std::uniform_real_distribution<double> d(-1e6, 1e6);
        return Value(d(rng) / ((rng() % 7) + 1));
    }
    case DType::Object:
    case DType::String: return Value(random_text(rng));
    case DType::Date: return Value(Date{static_cast<std::int64_t>(rng() % 2'000'000'000) * 1'000'000'000});
    case DType::Time: return Value(Duration::from_ns(static_cast<std::int64_t>(rng() % 100'000'000'000ULL)));
    }
    return {};
}

constexpr DType kAllTypes[] = {DType::Bool, DType::Date, DType::Float, DType::Integer,
                               DType::Object, DType::String, DType::Time};

Header random_header(std::mt19937& rng) {
    Header h;
    h.name = random_id(rng, "db");
    h.source = "src " + random_text(rng);
    h.usage = "research";
    if (rng() % 2) h.author = "A. " + random_text(rng);
    if (rng() % 2) h.description = random_text(rng) + "desc";
    if (rng() % 2) h.expires = Date{static_cast<std::int64_t>(rng() % 20000) * 86'400'000'000'000};
    for (unsigned i = 0; i < rng() % 3; ++i) h.languages.push_back(random_id(rng, "lang"));
    if (rng() % 2) h.license = "CC0";
    if (rng() % 2) h.organisation = "org";
    if (rng() % 2) h.custom["custom_" + random_id(rng, "k")] = random_text(rng) + "v";
    h.raters["r1"] = RaterDecl{};
    h.splits["train"] = SplitDecl{SplitType::Train, std::nullopt};
    for (int i = 0; i < 4; ++i) {
        Scheme s;
        s.dtype = kAllTypes[rng() % 7];
        if ((s.dtype == DType::Integer || s.dtype == DType::Float) && rng() % 2) {
            s.minimum = -10;
            s.maximum = 10.5;
        }
        if (s.dtype == DType::String && rng() % 2) s.labels = std::vector<Value>{str("p"), str("q, r")};
        if (rng() % 2) s.description = random_text(rng) + ".";
        h.schemes["s" + std::to_string(i)] = s;
    }
    const IndexKind kinds[] = {IndexKind::Filewise, IndexKind::Segmented, IndexKind::Misc};
    for (int i = 0; i < 3; ++i) {
        TableDecl t;
        t.kind = kinds[rng() % 3];
        if (t.kind == IndexKind::Misc) {
            t.levels = {{"key", rng() % 2 ? DType::String : DType::Integer}};
            if (rng() % 2) t.levels.push_back({"sub", DType::Integer});
        }
        for (int c = 0; c < 3; ++c) {
            ColumnDecl col{"c" + std::to_string(c), std::nullopt, std::nullopt, std::nullopt};
            if (rng() % 2) col.scheme_id = "s" + std::to_string(rng() % 4);
            if (rng() % 3 == 0) col.rater_id = "r1";
            if (rng() % 3 == 0) col.description = random_text(rng) + "d";
            t.columns.push_back(col);
        }
        if (rng() % 3 == 0) t.split_id = "train";
        h.tables["t" + std::to_string(i)] = t;
    }
    return h;
}

Value value_for(std::mt19937& rng, const SchemeRegistry& reg, const ColumnDecl& c) {
    if (rng() % 6 == 0) return {};
    const DType t = reg.column_dtype(c);
    if (c.scheme_id) {
        const Scheme& s = reg.scheme(*c.scheme_id);
        if (s.labels) return (*s.labels)[rng() % s.labels->size()];
        if (s.minimum) return t == DType::Integer ? Value(std::int64_t(rng() % 10)) : Value(double(rng() % 100) / 11);
    }
    return random_value(rng, t);
}

Table random_table(std::mt19937& rng, const Header& h, const std::string& id, const SchemeRegistry& reg) {
    const TableDecl& decl = h.table(id);
    const std::size_t rows = rng() % 12;
    Index index;
    if (decl.kind == IndexKind::Filewise) {
        std::vector<std::string> files;
        for (std::size_t i = 0; i < rows; ++i) files.push_back("d" + std::to_string(i % 3) + "/f" + std::to_string(i) + ".wav");
        index = Index::filewise(files);
    } else if (decl.kind == IndexKind::Segmented) {
        std::vector<std::string> files;
        std::vector<Duration> starts;
        std::vector<std::optional<Duration>> ends;
        for (std::size_t i = 0; i < rows; ++i) {
            files.push_back("f" + std::to_string(i % 4) + ".wav");
            starts.push_back(Duration::from_ns(static_cast<std::int64_t>(i) * 1'234'567'891));
            if (rng() % 4 == 0) {
                ends.push_back(std::nullopt);
            } else {
                ends.push_back(starts.back() + Duration::from_ns(1 + rng() % 5'000'000'000ULL));
            }
        }
        index = Index::segmented(files, starts, ends);
    } else {
        index.kind = IndexKind::Misc;
        index.levels = decl.levels;
        index.columns.assign(decl.levels.size(), {});
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t l = 0; l < decl.levels.size(); ++l) {
                if (decl.levels[l].dtype == DType::String) {
                    index.columns[l].push_back(Value("k," + std::to_string(i)));
                } else {
                    index.columns[l].push_back(Value(static_cast<std::int64_t>(i)));
                }
            }
        }
    }
    std::vector<Column> cols;
    for (const auto& c : decl.columns) {
        Column col{c.id, c.scheme_id, c.rater_id, {}};
        for (std::size_t i = 0; i < rows; ++i) col.values.push_back(value_for(rng, reg, c));
        cols.push_back(std::move(col));
    }
    return Table(id, index, cols, reg, decl.split_id);
}

}  // namespace

TEST(Header, RandomRoundTrip) {
    std::mt19937 rng(11);
    for (int i = 0; i < 300; ++i) {
        const Header h = random_header(rng);
        validate_header(h);
        const std::string doc = serialize_header(h);
        const Header back = parse_header(doc);
        ASSERT_EQ(back, h) << doc;
        EXPECT_EQ(serialize_header(back), doc);
    }
}

TEST(Csv, ListingFilewise) {
    const Header h = parse_header(kEmodbYaml);
    SchemeRegistry reg(h);
    const Table t = parse_table_csv("file,emotion\na.wav,happy\nb.wav,angry", "emotion", h.table("emotion"), reg);
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.index().file(1), "b.wav");
    EXPECT_EQ(t.column("emotion").values[0], str("happy"));
    EXPECT_EQ(serialize_table_csv(t), "file,emotion\na.wav,happy\nb.wav,angry\n");
    EXPECT_EQ(parse_table_csv(serialize_table_csv(t), "emotion", h.table("emotion"), reg), t);
}

TEST(Csv, ListingSegmented) {
    Header h = parse_header(kEmodbYaml);
    TableDecl seg;
    seg.kind = IndexKind::Segmented;
    seg.columns.push_back({"emotion", "emotion", std::nullopt, std::nullopt});
    h.tables["segments"] = seg;
    SchemeRegistry reg(h);
    const char* text =
        "file,start,end,emotion\n"
        "c.wav,0 days 00:00:01.0,0 days 00:00:03.3,happy\n"
        "c.wav,0 days 00:00:03.5,0 days 00:00:07.8,angry\n";
    const Table t = parse_table_csv(text, "segments", seg, reg);
    ASSERT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.index().start(0), Duration::from_seconds(1));
    EXPECT_EQ(t.index().end(0), Duration::from_ms(3300));
    EXPECT_EQ(t.index().end(1), Duration::from_ms(7800));
    const std::string out = serialize_table_csv(t);
    EXPECT_NE(out.find("c.wav,0 days 00:00:01,0 days 00:00:03.3,happy"), std::string::npos);
    EXPECT_EQ(parse_table_csv(out, "segments", seg, reg), t);
}

TEST(Csv, ListingMisc) {
    Header h = parse_header(kEmodbYaml);
    TableDecl misc;
    misc.kind = IndexKind::Misc;
    misc.levels = {{"speaker", DType::String}};
    misc.columns = {{"age", std::nullopt, std::nullopt, std::nullopt}, {"gender", std::nullopt, std::nullopt, std::nullopt}};
    Scheme age;
    age.dtype = DType::Integer;
    age.minimum = 0;
    age.maximum = 120;
    h.schemes["age"] = age;
    misc.columns[0].scheme_id = "age";
    h.tables["speaker"] = misc;
    validate_header(h);
    SchemeRegistry reg(h);
    const Table t = parse_table_csv("speaker,age,gender\nspk0,29,female\nspk1,93,male", "speaker", misc, reg);
    EXPECT_EQ(t.index().kind, IndexKind::Misc);
    EXPECT_EQ(t.column("age").values[0], Value(std::int64_t{29}));
    EXPECT_EQ(t.column("gender").values[1], str("male"));
    EXPECT_EQ(parse_table_csv(serialize_table_csv(t), "speaker", misc, reg), t);
    // 130 exceeds the age scheme maximum
    EXPECT_EQ(code_of([&] { parse_table_csv("speaker,age,gender\nspk0,130,female", "speaker", misc, reg); }),
              ErrorCode::Validation);
}

TEST(Csv, Errors) {
    const Header h = parse_header(kEmodbYaml);
    SchemeRegistry reg(h);
    const TableDecl& d = h.table("emotion");
    EXPECT_EQ(code_of([&] { parse_table_csv("file,emotion\na.wav,bored\n", "emotion", d, reg); }), ErrorCode::Validation);
    EXPECT_EQ(code_of([&] { parse_table_csv("file,emotion\na.wav,happy\na.wav,angry\n", "emotion", d, reg); }),
              ErrorCode::Validation);
    EXPECT_ANY_THROW(parse_table_csv("file,mood\na.wav,happy\n", "emotion", d, reg));
    EXPECT_ANY_THROW(parse_table_csv("file,emotion\n../a.wav,happy\n", "emotion", d, reg));
    Header hs = h;
    TableDecl seg;
    seg.kind = IndexKind::Segmented;
    hs.tables["s"] = seg;
    SchemeRegistry rs(hs);
    EXPECT_ANY_THROW(parse_table_csv("file,start,end\na.wav,xx,1\n", "s", seg, rs));
    EXPECT_ANY_THROW(parse_table_csv("file,start,end\na.wav,2,1\n", "s", seg, rs));
    // empty end means until the end of the file
    const Table open = parse_table_csv("file,start,end\na.wav,2,\n", "s", seg, rs);
    EXPECT_FALSE(open.index().end(0).has_value());
}

TEST(Csv, QuotingAndMissing) {
    Header h;
    h.name = "x";
    h.source = "s";
    h.usage = "u";
    TableDecl t;
    t.columns = {{"v", std::nullopt, std::nullopt, std::nullopt}};
    h.tables["t"] = t;
    SchemeRegistry reg(h);
    const Table tab("t", Index::filewise({"a,b.wav", "c.wav", "d.wav"}),
                    {Column{"v", std::nullopt, std::nullopt, {str("say \"hi\"\nnow"), str(""), Value{}}}}, reg);
    const std::string text = serialize_table_csv(tab);
    EXPECT_EQ(text, "file,v\n\"a,b.wav\",\"say \"\"hi\"\"\nnow\"\nc.wav,\"\"\nd.wav,\n");
    EXPECT_EQ(parse_table_csv(text, "t", t, reg), tab);
}

TEST(Csv, RandomRoundTrip) {
    std::mt19937 rng(3);
    int tables = 0;
    for (int i = 0; i < 150; ++i) {
        const Header h = random_header(rng);
        SchemeRegistry reg(h);
        for (const auto& [id, decl] : h.tables) {
            const Table t = random_table(rng, h, id, reg);
            const std::string text = serialize_table_csv(t);
            const Table back = parse_table_csv(text, id, decl, reg);
            ASSERT_EQ(back, t) << text;
            EXPECT_EQ(serialize_table_csv(back), text);
            ++tables;
        }
    }
    EXPECT_EQ(tables, 450);
}

TEST(Scheme, ValidateValue) {
    const Header h = parse_header(kEmodbYaml);
    const Scheme& emotion = h.schemes.at("emotion");
    EXPECT_FALSE(validate_value(str("happy"), emotion));
    EXPECT_TRUE(validate_value(str("bored"), emotion));
    Scheme age;
    age.dtype = DType::Integer;
    age.minimum = 0;
    age.maximum = 120;
    EXPECT_FALSE(validate_value(Value(std::int64_t{29}), age));
    EXPECT_TRUE(validate_value(Value(std::int64_t{121}), age));
    EXPECT_TRUE(validate_value(Value(2.5), age));
    EXPECT_FALSE(validate_value(Value{}, age));
}

TEST(Scheme, TableRejectsViolations) {
    const Header h = parse_header(kEmodbYaml);
    SchemeRegistry reg(h);
    EXPECT_THROW(Table("emotion", Index::filewise({"a.wav"}), {Column{"emotion", "emotion", {}, {str("bored")}}}, reg),
                 Error);
    EXPECT_THROW(Table("emotion", Index::filewise({"a.wav"}), {Column{"emotion", "emotion", {}, {}}}, reg), Error);
}

namespace {

// The three tables of the mapping example: speakers (misc), files, emotion.
Database mapping_db() {
    Database db;
    Header& h = db.header;
    h.name = "mapping";
    h.source = "s";
    h.usage = "research";
    Scheme speaker;
    speaker.dtype = DType::String;
    speaker.labels_table = "speakers";
    h.schemes["speaker"] = speaker;
    Scheme age;
    age.dtype = DType::Integer;
    h.schemes["age"] = age;
    TableDecl speakers;
    speakers.kind = IndexKind::Misc;
    speakers.levels = {{"speaker", DType::String}};
    speakers.columns = {{"age", "age", std::nullopt, std::nullopt}};
    h.tables["speakers"] = speakers;
    TableDecl files;
    files.columns = {{"speaker", "speaker", std::nullopt, std::nullopt}};
    h.tables["files"] = files;
    TableDecl emotion;
    emotion.kind = IndexKind::Segmented;
    emotion.columns = {{"emotion", std::nullopt, std::nullopt, std::nullopt}};
    h.tables["emotion"] = emotion;
    validate_header(h);
    const std::map<std::string, std::string> csv = {
        {"speakers", "speaker,age\nspk01,19\nspk02,21\n"},
        {"files", "file,speaker\na.wav,spk01\nb.wav,spk02\n"},
        {"emotion", "file,start,end,emotion\na.wav,0,0 days 00:00:01,happy\na.wav,0,0 days 00:00:02,calm\n"}};
    return parse_database(h, [&](const std::string& id) { return csv.at(id); });
}

}  // namespace

TEST(TableGet, MapToAge) {
    const Database db = mapping_db();
    GetOptions o;
    o.index = db["emotion"].index();
    o.map = "age";
    o.column = "speaker";
    const Frame f = db.get("files", o);
    ASSERT_EQ(f.rows(), 2u);
    ASSERT_EQ(f.column_ids, std::vector<std::string>{"age"});
    EXPECT_EQ(f.index.file(0), "a.wav");
    EXPECT_EQ(f.index.start(0), Duration{});
    EXPECT_EQ(f.index.end(0), Duration::from_seconds(1));
    EXPECT_EQ(f.index.end(1), Duration::from_seconds(2));
    EXPECT_EQ(f.columns[0][0], Value(std::int64_t{19}));
    EXPECT_EQ(f.columns[0][1], Value(std::int64_t{19}));
    EXPECT_EQ(serialize_frame_csv(f), "file,start,end,age\na.wav,0 days 00:00:00,0 days 00:00:01,19\n"
                                      "a.wav,0 days 00:00:00,0 days 00:00:02,19\n");
}

TEST(TableGet, MapErrors) {
    const Database db = mapping_db();
    GetOptions o;
    o.map = "height";
    EXPECT_ANY_THROW(db.get("files", o));
    o.map = "age";
    EXPECT_ANY_THROW(db.get("emotion", o));  // no misc-backed scheme
}

TEST(TableGet, Identity) {
    const Database db = mapping_db();
    const Table& t = db["files"];
    GetOptions o;
    o.index = t.index();
    const Frame f = table_get(t, o);
    EXPECT_EQ(f.index, t.index());
    EXPECT_EQ(f.columns[0], t.column("speaker").values);
    EXPECT_EQ(table_get(t), f);
}

TEST(TableGet, BroadcastLaw) {
    const Database db = mapping_db();
    const Table& files = db["files"];
    // three segments of a.wav, one of b.wav, one of an unknown file (dropped)
    const Index seg = Index::segmented({"a.wav", "a.wav", "a.wav", "b.wav", "zzz.wav"},
                                       {Duration{}, Duration::from_seconds(1), Duration::from_seconds(2), Duration{},
                                        Duration{}},
                                       {Duration::from_seconds(1), Duration::from_seconds(2), std::nullopt,
                                        Duration::from_seconds(4), Duration::from_seconds(1)});
    GetOptions o;
    o.index = seg;
    const Frame f = table_get(files, o);
    ASSERT_EQ(f.rows(), 4u);
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const std::string& file = f.index.file(i);
        const Value expected = file == "a.wav" ? str("spk01") : str("spk02");
        EXPECT_EQ(f.columns[0][i], expected);
    }
    // misc tables cannot be re-indexed onto files
    GetOptions m;
    m.index = seg;
    EXPECT_ANY_THROW(table_get(db["speakers"], m));
}

TEST(Database, LoadOrderPutsMiscFirst) {
    const Database db = mapping_db();
    const auto order = table_load_order(db.header);
    const auto pos = [&](const char* id) { return std::find(order.begin(), order.end(), id) - order.begin(); };
    EXPECT_LT(pos("speakers"), pos("files"));
    EXPECT_EQ(db.referenced_files(), (std::vector<std::string>{"a.wav", "b.wav"}));
}
