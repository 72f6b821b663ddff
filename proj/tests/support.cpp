#include "support.hpp"

#include "audvault/csv.hpp"

#include <cmath>
#include <random>

namespace testing_support {

using namespace audvault;

AudioBuffer tone(int rate, int channels, std::size_t frames, unsigned seed) {
    AudioBuffer b;
    b.sampling_rate = rate;
    std::mt19937 rng(seed * 7919u + 17u);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    const double freq = 200.0 + 37.0 * (seed % 50);
    for (int c = 0; c < channels; ++c) {
        std::vector<double> ch(frames);
        for (std::size_t i = 0; i < frames; ++i) {
            ch[i] = 0.4 * std::sin(2 * M_PI * freq * (c + 1) * static_cast<double>(i) / rate) + noise(rng);
        }
        b.channels.push_back(std::move(ch));
    }
    return b;
}

void write_tone(const fs::path& file, int rate, int channels, std::size_t frames, unsigned seed, int bits) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    write_wav(tone(rate, channels, frames, seed), bits, file);
}

void write_dc(const fs::path& file, int rate, int channels, std::size_t frames, double level, int bits) {
    AudioBuffer b;
    b.sampling_rate = rate;
    b.channels.assign(channels, std::vector<double>(frames, level));
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    write_wav(b, bits, file);
}

Header emotion_header(const std::string& name) {
    Header h;
    h.name = name;
    h.source = "https://example.org/" + name;
    h.usage = "research";
    h.languages = {"deu"};
    Scheme s;
    s.dtype = DType::String;
    s.labels = std::vector<Value>{std::string("happy"), std::string("angry"), std::string("neutral")};
    h.schemes["emotion"] = s;
    TableDecl t;
    t.kind = IndexKind::Filewise;
    t.columns.push_back({"emotion", "emotion", std::nullopt, std::nullopt});
    h.tables["emotion"] = t;
    return h;
}

std::string media_name(int i) { return "audio/f" + std::to_string(i) + ".wav"; }

void write_database(const fs::path& root, const Database& db) {
    fs::create_directories(root);
    write_file(root / kHeaderFile, serialize_header(db.header));
    for (const auto& [id, t] : db.tables) {
        write_file(root / table_file_name(id), serialize_table_csv(t));
    }
}

void write_dataset(const fs::path& root, const DatasetShape& shape) {
    static const char* labels[] = {"happy", "angry", "neutral"};
    Header h = emotion_header(shape.name);
    std::vector<std::string> files;
    std::vector<Value> values;
    for (int i = 0; i < shape.files; ++i) {
        files.push_back(media_name(i));
        values.emplace_back(std::string(labels[i % 3]));
        write_tone(root / files.back(), shape.rate, shape.channels, shape.frames, shape.salt * 1000u + i, shape.bits);
    }
    SchemeRegistry reg(h);
    Database db;
    db.header = h;
    db.tables.emplace("emotion", Table("emotion", Index::filewise(files), {Column{"emotion", "emotion", {}, values}},
                                       reg));
    write_database(root, db);
}

std::shared_ptr<Backend> make_backend(const fs::path& host, const std::string& repo) {
    return open_backend(Repository{repo, host.string(), "file-system"});
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
        const std::string name = it->path().filename().string();
        if (name.starts_with(".")) {
            if (it->is_directory()) it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file()) out[fs::relative(it->path(), root).generic_string()] = read_file(it->path());
    }
    return out;
}

std::size_t count_objects(const fs::path& dir) {
    std::size_t n = 0;
    std::error_code ec;
    if (!fs::exists(dir, ec)) return 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file();
    return n;
}

}  // namespace testing_support
