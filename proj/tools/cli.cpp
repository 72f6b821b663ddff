#include "cli.hpp"

#include "audvault/config.hpp"
#include "audvault/datacard.hpp"
#include "audvault/error.hpp"
#include "audvault/loader.hpp"
#include "audvault/publisher.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>

namespace audvault {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

json value_json(const Value& v) {
    return std::visit(
        [&](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::int64_t> ||
                                 std::is_same_v<T, double> || std::is_same_v<T, std::string>) {
                return x;
            } else {
                return format_value(v);
            }
        },
        v);
}

json header_json(const Header& h) {
    json j;
    j["name"] = h.name;
    j["source"] = h.source;
    j["usage"] = h.usage;
    j["author"] = opt_json(h.author);
    j["description"] = opt_json(h.description);
    j["expires"] = h.expires ? json(format_date(*h.expires)) : json(nullptr);
    j["languages"] = h.languages;
    j["license"] = opt_json(h.license);
    j["organisation"] = opt_json(h.organisation);
    j["custom"] = h.custom;
    j["schemes"] = json::object();
    for (const auto& [id, s] : h.schemes) {
        json js;
        js["dtype"] = dtype_name(s.dtype);
        if (s.labels) {
            js["labels"] = json::array();
            for (const auto& l : *s.labels) js["labels"].push_back(value_json(l));
        } else {
            js["labels"] = nullptr;
        }
        js["labels_table"] = opt_json(s.labels_table);
        js["minimum"] = s.minimum ? json(*s.minimum) : json(nullptr);
        js["maximum"] = s.maximum ? json(*s.maximum) : json(nullptr);
        js["description"] = opt_json(s.description);
        j["schemes"][id] = js;
    }
    j["tables"] = json::object();
    for (const auto& [id, t] : h.tables) {
        json jt;
        jt["type"] = index_kind_name(t.kind);
        jt["split_id"] = opt_json(t.split_id);
        jt["description"] = opt_json(t.description);
        jt["columns"] = json::array();
        for (const auto& c : t.columns) {
            jt["columns"].push_back({{"id", c.id},
                                     {"scheme_id", opt_json(c.scheme_id)},
                                     {"rater_id", opt_json(c.rater_id)},
                                     {"description", opt_json(c.description)}});
        }
        j["tables"][id] = jt;
    }
    j["splits"] = json::object();
    for (const auto& [id, s] : h.splits) {
        j["splits"][id] = {{"type", split_type_name(s.type)}, {"description", opt_json(s.description)}};
    }
    j["raters"] = json::object();
    for (const auto& [id, r] : h.raters) {
        j["raters"][id] = {{"type", r.type}, {"description", opt_json(r.description)}};
    }
    j["attachments"] = h.attachments;
    return j;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
    return out;
}

struct Globals {
    std::optional<fs::path> config;
    std::optional<fs::path> cache;
    bool json = false;
};

Backends select_backends(const Config& cfg, const std::optional<std::string>& repo) {
    if (cfg.repositories.empty()) fail(ErrorCode::InvalidArgument, "no repositories configured");
    if (!repo) return open_backends(cfg.repositories);
    for (const auto& r : cfg.repositories) {
        if (r.name == *repo) return open_backends({r});
    }
    fail(ErrorCode::NotFound, "repository '" + *repo + "' is not configured");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Publish, version, cache and load annotated audio datasets.", "audvault"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Config file");
    app.add_option("--cache", g.cache, "Cache root");
    app.add_flag("--json", g.json, "Machine-readable output");

    // publish
    std::string pub_root, pub_version, pub_repo;
    std::optional<std::string> pub_previous;
    bool pub_scratch = false;
    auto* publish_cmd = app.add_subcommand("publish", "Publish a dataset folder as a new version");
    publish_cmd->add_option("root", pub_root, "Dataset folder")->required();
    publish_cmd->add_option("version", pub_version, "Version to publish")->required();
    publish_cmd->add_option("--repo", pub_repo, "Target repository")->required();
    publish_cmd->add_option("--previous", pub_previous, "Previous version (default: latest)");
    publish_cmd->add_flag("--from-scratch", pub_scratch, "Ignore earlier versions");

    // load
    LoadRequest req;
    std::optional<std::string> load_version;
    std::optional<int> sampling_rate, bit_depth;
    std::vector<int> channels;
    std::vector<std::string> load_tables, load_media;
    int workers = 4;
    auto* load_cmd = app.add_subcommand("load", "Materialise a dataset in the cache and print its folder");
    load_cmd->add_option("name", req.name, "Dataset")->required();
    load_cmd->add_option("--version", load_version, "Version (default: latest)");
    load_cmd->add_option("--sampling-rate", sampling_rate, "Target sampling rate in Hz");
    load_cmd->add_option("--bit-depth", bit_depth, "Target bit depth (16, 24, 32)");
    load_cmd->add_option("--channels", channels, "Channel selection, e.g. 0,1")->delimiter(',');
    load_cmd->add_flag("--mixdown", req.flavour.mixdown, "Mix down to mono");
    load_cmd->add_option("--tables", load_tables, "Table ids or globs");
    load_cmd->add_option("--media", load_media, "Media paths or globs");
    load_cmd->add_flag("--only-metadata", req.only_metadata, "Skip media");
    load_cmd->add_option("--workers", workers, "Parallel downloads")->check(CLI::PositiveNumber);

    // load-to
    std::string lt_root, lt_name;
    std::optional<std::string> lt_version;
    auto* load_to_cmd = app.add_subcommand("load-to", "Write an editable copy of a version into a folder");
    load_to_cmd->add_option("root", lt_root, "Target folder")->required();
    load_to_cmd->add_option("name", lt_name, "Dataset")->required();
    load_to_cmd->add_option("--version", lt_version, "Version (default: latest)");

    bool only_latest = false;
    auto* available_cmd = app.add_subcommand("available", "List published datasets");
    available_cmd->add_flag("--only-latest", only_latest, "One row per dataset");

    std::string info_name;
    std::optional<std::string> info_version;
    auto* info_cmd = app.add_subcommand("info", "Show the header of a dataset version");
    info_cmd->add_option("name", info_name, "Dataset")->required();
    info_cmd->add_option("--version", info_version, "Version (default: latest)");

    std::string search_scheme;
    auto* search_cmd = app.add_subcommand("search", "Datasets whose latest version declares a scheme");
    search_cmd->add_option("scheme", search_scheme, "Scheme id")->required();

    std::string rm_name, rm_repo;
    std::vector<std::string> rm_files;
    auto* remove_cmd = app.add_subcommand("remove-media", "Remove media files from every published version");
    remove_cmd->add_option("dataset", rm_name, "Dataset")->required();
    remove_cmd->add_option("files", rm_files, "Media paths")->required();
    remove_cmd->add_option("--repo", rm_repo, "Repository")->required();

    std::string dc_name;
    std::optional<std::string> dc_version, dc_output;
    auto* datacard_cmd = app.add_subcommand("datacard", "Render a markdown data card");
    datacard_cmd->add_option("name", dc_name, "Dataset")->required();
    datacard_cmd->add_option("--version", dc_version, "Version (default: latest)");
    datacard_cmd->add_option("--output", dc_output, "Write to a file instead of stdout");

    auto* clear_cmd = app.add_subcommand("cache-clear", "Delete everything in the cache");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        const Config cfg = load_config(g.config);
        const fs::path cache_root = resolve_cache_root(g.cache, cfg);

        if (publish_cmd->parsed()) {
            auto backends = select_backends(cfg, pub_repo);
            PublishOptions po{pub_previous, pub_scratch};
            const PublishReport r = publish(pub_root, pub_version, *backends.front(), po);
            if (g.json) {
                out << json{{"version", r.version},
                            {"previous_version", opt_json(r.previous_version)},
                            {"uploaded_archives", r.uploaded_archives},
                            {"added", r.added},
                            {"modified", r.modified},
                            {"reused", r.reused},
                            {"deleted", r.deleted},
                            {"total_bytes_uploaded", r.total_bytes_uploaded}}
                           .dump(2)
                    << '\n';
            } else {
                out << "published " << r.version << " (previous: " << r.previous_version.value_or("none") << ")\n"
                    << "added " << r.added.size() << ", modified " << r.modified.size() << ", reused " << r.reused
                    << ", deleted " << r.deleted << "\n"
                    << "uploaded " << r.uploaded_archives.size() << " archives, " << r.total_bytes_uploaded
                    << " bytes\n";
                for (const auto& a : r.uploaded_archives) out << "  " << a << '\n';
            }
        } else if (load_cmd->parsed()) {
            req.version = load_version;
            req.flavour.sampling_rate = sampling_rate;
            req.flavour.bit_depth = bit_depth;
            if (!channels.empty()) req.flavour.channels = channels;
            if (!load_tables.empty()) req.tables = load_tables;
            if (!load_media.empty()) req.media = load_media;
            LoadOptions lo;
            lo.cache_root = cache_root;
            lo.workers = workers;
            const LoadedDataset ds = load(req, select_backends(cfg, std::nullopt), lo);
            if (g.json) {
                std::vector<std::string> ids;
                for (const auto& [id, t] : ds.tables) ids.push_back(id);
                out << json{{"root", ds.root.string()},
                            {"name", ds.key.name},
                            {"version", ds.key.version},
                            {"repository", ds.key.repository},
                            {"flavour", ds.key.flavour_id},
                            {"tables", ids},
                            {"media", ds.media()},
                            {"removed_media", ds.removed_media}}
                           .dump(2)
                    << '\n';
            } else {
                out << ds.root.string() << '\n';
            }
        } else if (load_to_cmd->parsed()) {
            auto backends = select_backends(cfg, std::nullopt);
            const std::string v = lt_version ? *lt_version : latest_version(lt_name, backends);
            out << load_to(lt_root, lt_name, v, backends).string() << '\n';
        } else if (available_cmd->parsed()) {
            const auto rows = available(select_backends(cfg, std::nullopt), only_latest);
            if (g.json) {
                json j = json::array();
                for (const auto& r : rows) {
                    j.push_back({{"name", r.name},
                                 {"version", r.version},
                                 {"repository", r.repository},
                                 {"source", r.source},
                                 {"usage", r.usage},
                                 {"license", opt_json(r.license)},
                                 {"languages", r.languages}});
                }
                out << j.dump(2) << '\n';
            } else {
                out << "name\tversion\trepository\tusage\tlanguages\n";
                for (const auto& r : rows) {
                    out << r.name << '\t' << r.version << '\t' << r.repository << '\t' << r.usage << '\t'
                        << join(r.languages) << '\n';
                }
            }
        } else if (info_cmd->parsed()) {
            const Header h = info_header(info_name, info_version, select_backends(cfg, std::nullopt));
            if (g.json) {
                out << header_json(h).dump(2) << '\n';
            } else {
                std::vector<std::string> schemes, tables;
                for (const auto& [id, s] : h.schemes) schemes.push_back(id);
                for (const auto& [id, t] : h.tables) tables.push_back(id);
                out << "name: " << h.name << "\nsource: " << h.source << "\nusage: " << h.usage << '\n';
                if (h.author) out << "author: " << *h.author << '\n';
                if (h.license) out << "license: " << *h.license << '\n';
                if (!h.languages.empty()) out << "languages: " << join(h.languages) << '\n';
                out << "schemes: " << join(schemes) << "\ntables: " << join(tables) << '\n';
            }
        } else if (search_cmd->parsed()) {
            const auto names = search_by_scheme(search_scheme, select_backends(cfg, std::nullopt));
            if (g.json) {
                out << json(names).dump(2) << '\n';
            } else {
                for (const auto& n : names) out << n << '\n';
            }
        } else if (remove_cmd->parsed()) {
            auto backends = select_backends(cfg, rm_repo);
            const Cache cache(cache_root);
            const RemoveReport r = remove_media(rm_name, rm_files, *backends.front(), &cache);
            if (g.json) {
                out << json{{"files", r.files},
                            {"versions_updated", r.versions_updated},
                            {"archives_replaced", r.archives_replaced}}
                           .dump(2)
                    << '\n';
            } else {
                out << "removed " << r.files.size() << " files; updated versions: "
                    << (r.versions_updated.empty() ? "none" : join(r.versions_updated)) << '\n';
            }
        } else if (datacard_cmd->parsed()) {
            auto backends = select_backends(cfg, std::nullopt);
            const std::string v = dc_version ? *dc_version : latest_version(dc_name, backends);
            const std::string card = render_datacard(info_header(dc_name, v, backends), info_deps(dc_name, v, backends));
            if (dc_output) {
                std::ofstream f(*dc_output, std::ios::binary);
                f << card;
                if (!f) fail(ErrorCode::Io, "cannot write '" + *dc_output + "'");
            } else {
                out << card;
            }
        } else if (clear_cmd->parsed()) {
            Cache(cache_root).clear();
            out << "cleared " << cache_root.string() << '\n';
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_user_error() ? 1 : 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace audvault
