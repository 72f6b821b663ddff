#include "audvault/config.hpp"

#include "audvault/database.hpp"
#include "audvault/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cstdlib>
#include <set>

namespace audvault {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

fs::path home() {
    if (auto h = env("HOME")) return *h;
    return fs::current_path();
}

std::string host_variable(const std::string& repo) {
    std::string out = "AUDVAULT_HOST_";
    for (unsigned char c : repo) out += std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
    return out;
}

}  // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    try {
        const YAML::Node root = YAML::Load(text);
        if (!root || root.IsNull()) return cfg;
        if (!root.IsMap()) fail(ErrorCode::InvalidArgument, "config must be a mapping");
        if (root["cache_root"]) cfg.cache_root = root["cache_root"].as<std::string>();
        std::set<std::string> names;
        if (const auto repos = root["repositories"]) {
            if (!repos.IsSequence()) fail(ErrorCode::InvalidArgument, "config 'repositories' must be a list");
            for (const auto& r : repos) {
                Repository repo;
                if (!r["name"] || !r["host"]) {
                    fail(ErrorCode::InvalidArgument, "every repository needs a name and a host");
                }
                repo.name = r["name"].as<std::string>();
                repo.host = r["host"].as<std::string>();
                if (r["backend"]) repo.backend_kind = r["backend"].as<std::string>();
                if (!names.insert(repo.name).second) {
                    fail(ErrorCode::InvalidArgument, "duplicate repository '" + repo.name + "'");
                }
                cfg.repositories.push_back(std::move(repo));
            }
        }
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed config: ") + e.what());
    }
    return cfg;
}

Config load_config(const std::optional<fs::path>& explicit_path) {
    std::optional<fs::path> file;
    if (explicit_path) {
        if (!fs::is_regular_file(*explicit_path)) {
            fail(ErrorCode::NotFound, "config file '" + explicit_path->string() + "' not found");
        }
        file = explicit_path;
    } else if (auto e = env("AUDVAULT_CONFIG")) {
        if (!fs::is_regular_file(*e)) fail(ErrorCode::NotFound, "config file '" + *e + "' not found");
        file = fs::path(*e);
    } else {
        for (const fs::path& p : {fs::path("audvault.yaml"), home() / ".config" / "audvault" / "config.yaml"}) {
            std::error_code ec;
            if (fs::is_regular_file(p, ec)) {
                file = p;
                break;
            }
        }
    }
    Config cfg;
    if (file) {
        cfg = parse_config(read_file(*file));
        cfg.source = file;
    }
    for (auto& r : cfg.repositories) {
        if (auto h = env(host_variable(r.name).c_str())) r.host = *h;
    }
    return cfg;
}

fs::path resolve_cache_root(const std::optional<fs::path>& flag, const Config& config) {
    if (flag) return *flag;
    if (auto e = env("AUDVAULT_CACHE_ROOT")) return *e;
    if (config.cache_root) return *config.cache_root;
    return home() / ".cache" / "audvault";
}

}  // namespace audvault
