#pragma once

#include "audvault/backend.hpp"
#include "audvault/database.hpp"
#include "audvault/header.hpp"
#include "audvault/table.hpp"
#include "audvault/tempdir.hpp"
#include "audvault/wav.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace testing_support {

// Deterministic noisy tone; `seed` changes the content.
audvault::AudioBuffer tone(int rate, int channels, std::size_t frames, unsigned seed);
void write_tone(const fs::path& file, int rate, int channels, std::size_t frames, unsigned seed, int bits = 16);
// Constant amplitude on every channel.
void write_dc(const fs::path& file, int rate, int channels, std::size_t frames, double level, int bits = 16);

// name/source/usage, an "emotion" label scheme and a filewise "emotion" table.
audvault::Header emotion_header(const std::string& name);

struct DatasetShape {
    std::string name = "emodb";
    int files = 4;
    int rate = 16000;
    int channels = 1;
    std::size_t frames = 1600;
    int bits = 16;
    unsigned salt = 0;
};

std::string media_name(int i);  // "audio/f<i>.wav"

// Writes db.yaml, db.emotion.csv and the media files.
void write_dataset(const fs::path& root, const DatasetShape& shape);

// Writes header and tables of `db` into `root`.
void write_database(const fs::path& root, const audvault::Database& db);

std::shared_ptr<audvault::Backend> make_backend(const fs::path& host, const std::string& repo = "local");

// Relative path -> bytes of every regular file below `root` (hidden entries skipped).
std::map<std::string, std::string> snapshot_tree(const fs::path& root);

std::size_t count_objects(const fs::path& dir);

}  // namespace testing_support
