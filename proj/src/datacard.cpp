#include "audvault/datacard.hpp"

#include <map>
#include <sstream>

namespace audvault {

namespace {

std::string cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n' || c == '\r') {
            out += ' ';
        } else {
            out += c;
        }
    }
    return out;
}

std::string opt(const std::optional<std::string>& s) { return s ? cell(*s) : ""; }

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
    std::string out;
    for (const auto& i : items) {
        if (!out.empty()) out += sep;
        out += i;
    }
    return out;
}

std::string number(double v) { return format_value(Value(v)); }

template <class K>
std::string histogram(const std::map<K, int>& counts) {
    std::vector<std::string> parts;
    for (const auto& [k, n] : counts) {
        std::ostringstream s;
        s << k << " (" << n << ")";
        parts.push_back(s.str());
    }
    return join(parts);
}

}  // namespace

std::string render_datacard(const Header& h, const DependencyTable& deps) {
    std::ostringstream out;
    out << "# " << h.name << "\n\n";
    if (h.description) out << cell(*h.description) << "\n\n";

    out << "## Metadata\n\n| Field | Value |\n|---|---|\n";
    out << "| name | " << cell(h.name) << " |\n";
    if (!deps.dataset_version().empty()) out << "| version | " << cell(deps.dataset_version()) << " |\n";
    out << "| source | " << cell(h.source) << " |\n";
    out << "| usage | " << cell(h.usage) << " |\n";
    out << "| author | " << opt(h.author) << " |\n";
    out << "| license | " << opt(h.license) << " |\n";
    out << "| organisation | " << opt(h.organisation) << " |\n";
    out << "| languages | " << cell(join(h.languages)) << " |\n";
    out << "| expires | " << (h.expires ? format_date(*h.expires) : "") << " |\n";
    for (const auto& [k, v] : h.custom) out << "| " << cell(k) << " | " << cell(v) << " |\n";

    std::map<int, int> rates, depths, channels;
    std::map<std::string, int> formats;
    Duration total;
    int files = 0;
    for (const auto& [path, e] : deps.entries()) {
        if (e.kind != FileKind::Media || e.removed) continue;
        ++files;
        if (e.duration) total = total + *e.duration;
        if (e.sampling_rate) ++rates[*e.sampling_rate];
        if (e.bit_depth) ++depths[*e.bit_depth];
        if (e.channels) ++channels[*e.channels];
        ++formats[e.format];
    }
    out << "\n## Media\n\n| Property | Value |\n|---|---|\n";
    out << "| files | " << files << " |\n";
    out << "| removed | " << deps.removed_media().size() << " |\n";
    out << "| duration | " << format_duration(total) << " |\n";
    out << "| sampling rates | " << histogram(rates) << " |\n";
    out << "| bit depths | " << histogram(depths) << " |\n";
    out << "| channels | " << histogram(channels) << " |\n";
    out << "| formats | " << cell(histogram(formats)) << " |\n";

    out << "\n## Tables\n";
    for (const auto& [id, t] : h.tables) {
        out << "\n### " << id << "\n\n";
        out << "type: " << index_kind_name(t.kind);
        if (t.split_id) out << ", split: " << *t.split_id;
        out << "\n\n";
        if (t.description) out << cell(*t.description) << "\n\n";
        if (t.kind == IndexKind::Misc) {
            std::vector<std::string> levels;
            for (const auto& l : t.levels) levels.push_back(l.name + " (" + dtype_name(l.dtype) + ")");
            out << "index: " << join(levels) << "\n\n";
        }
        out << "| Column | Scheme | Rater | Description |\n|---|---|---|---|\n";
        for (const auto& c : t.columns) {
            out << "| " << cell(c.id) << " | " << opt(c.scheme_id) << " | " << opt(c.rater_id) << " | "
                << opt(c.description) << " |\n";
        }
    }

    out << "\n## Schemes\n\n| Scheme | Dtype | Labels | Minimum | Maximum | Description |\n|---|---|---|---|---|---|\n";
    for (const auto& [id, s] : h.schemes) {
        std::string labels;
        if (s.labels) {
            std::vector<std::string> parts;
            for (const auto& v : *s.labels) parts.push_back(format_value(v));
            labels = join(parts);
        } else if (s.labels_table) {
            labels = "table " + *s.labels_table;
        }
        out << "| " << cell(id) << " | " << dtype_name(s.dtype) << " | " << cell(labels) << " | "
            << (s.minimum ? number(*s.minimum) : "") << " | " << (s.maximum ? number(*s.maximum) : "") << " | "
            << opt(s.description) << " |\n";
    }

    if (!h.splits.empty()) {
        out << "\n## Splits\n\n| Split | Type | Description |\n|---|---|---|\n";
        for (const auto& [id, s] : h.splits) {
            out << "| " << cell(id) << " | " << split_type_name(s.type) << " | " << opt(s.description) << " |\n";
        }
    }
    if (!h.raters.empty()) {
        out << "\n## Raters\n\n| Rater | Type | Description |\n|---|---|---|\n";
        for (const auto& [id, r] : h.raters) {
            out << "| " << cell(id) << " | " << cell(r.type) << " | " << opt(r.description) << " |\n";
        }
    }
    if (!h.attachments.empty()) {
        out << "\n## Attachments\n\n| Attachment | Path |\n|---|---|\n";
        for (const auto& [id, p] : h.attachments) out << "| " << cell(id) << " | " << cell(p) << " |\n";
    }
    return out.str();
}

}  // namespace audvault
