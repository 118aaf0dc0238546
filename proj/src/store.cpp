#include "tenq/store.hpp"

#include <algorithm>
#include <ctime>
#include <set>

#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/text_util.hpp"

namespace tenq::store {

std::string ItemKey::render() const { return document_id + "_" + std::to_string(part) + "_" + item_id; }

ItemKey ItemKey::parse(std::string_view key) {
    const auto last = key.rfind('_');
    const auto mid = last == std::string_view::npos || last == 0 ? std::string_view::npos : key.rfind('_', last - 1);
    if (mid == std::string_view::npos) throw Error("malformed item key: " + std::string(key));
    const auto part = key.substr(mid + 1, last - mid - 1);
    if (part != "1" && part != "2") throw Error("malformed item key: " + std::string(key));
    ItemKey k{std::string(key.substr(0, mid)), part[0] - '0', std::string(key.substr(last + 1))};
    if (k.document_id.empty() || k.item_id.empty()) throw Error("malformed item key: " + std::string(key));
    return k;
}

std::string document_id_for(std::string_view filing_id) {
    std::string out;
    for (char c : filing_id) {
        if (c != '-') out.push_back(c);
    }
    const bool digits = !out.empty() && std::all_of(out.begin(), out.end(), [](char c) { return c >= '0' && c <= '9'; });
    return digits ? out : std::string(filing_id);
}

std::string utc_timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json manifest_to_json(const Manifest& m) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : m.items) {
        items.push_back({{"key", it.key},
                         {"file", it.file},
                         {"part", it.part},
                         {"item_id", it.item_id},
                         {"method", itemize::to_string(it.method)},
                         {"title_block", it.title_block},
                         {"content_range", {it.content_range.begin, it.content_range.end}},
                         {"title_text", it.title_text}});
    }
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : m.stages) {
        nlohmann::json sj{{"stage", s.stage}, {"outcome", s.outcome}};
        if (!s.detail.empty()) sj["detail"] = s.detail;
        stages.push_back(std::move(sj));
    }
    return {{"schema", m.schema},
            {"filing_id", m.filing_id},
            {"document_id", m.document_id},
            {"format", ingest::to_string(m.format)},
            {"split", {{"pillar", m.split_pillar ? nlohmann::json(*m.split_pillar) : nlohmann::json(nullptr)},
                       {"block", m.split_block ? nlohmann::json(*m.split_block) : nlohmann::json(nullptr)}}},
            {"block_count", m.block_count},
            {"items", std::move(items)},
            {"stages", std::move(stages)},
            {"created_at", m.created_at},
            {"tool_version", m.tool_version}};
}

Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    m.schema = j.at("schema").get<int>();
    if (m.schema != kSchemaVersion) throw Error("unsupported manifest schema " + std::to_string(m.schema));
    m.filing_id = j.at("filing_id").get<std::string>();
    m.document_id = j.at("document_id").get<std::string>();
    m.format = ingest::format_from_string(j.at("format").get<std::string>());
    const auto& split = j.at("split");
    if (!split.at("pillar").is_null()) m.split_pillar = split["pillar"].get<std::string>();
    if (!split.at("block").is_null()) m.split_block = split["block"].get<std::size_t>();
    m.block_count = j.value("block_count", std::size_t{0});
    for (const auto& it : j.at("items")) {
        ManifestItem mi;
        mi.key = it.at("key").get<std::string>();
        mi.file = it.at("file").get<std::string>();
        mi.part = it.at("part").get<int>();
        mi.item_id = it.at("item_id").get<std::string>();
        mi.method = itemize::method_from_string(it.at("method").get<std::string>());
        mi.title_block = it.at("title_block").get<std::size_t>();
        mi.content_range = {it.at("content_range").at(0).get<std::size_t>(),
                            it.at("content_range").at(1).get<std::size_t>()};
        mi.title_text = it.value("title_text", "");
        m.items.push_back(std::move(mi));
    }
    for (const auto& s : j.value("stages", nlohmann::json::array())) {
        m.stages.push_back({s.at("stage").get<std::string>(), s.at("outcome").get<std::string>(), s.value("detail", "")});
    }
    m.created_at = j.value("created_at", "");
    m.tool_version = j.value("tool_version", "");
    return m;
}

std::string item_text(const NormalizedDoc& doc, BlockRange range) {
    std::string out;
    for (std::size_t i = range.begin; i < range.end && i < doc.blocks.size(); ++i) {
        const Block& b = doc.blocks[i];
        if (b.is_marker() || b.text.empty()) continue;
        if (!out.empty()) out += "\n\n";
        out += b.text;
    }
    return out;
}

fs::path filing_dir(const fs::path& out_dir, std::string_view document_id) { return out_dir / std::string(document_id); }

Manifest write_items(const NormalizedDoc& filing, const std::vector<itemize::ItemRecord>& records,
                     const fs::path& out_dir, const WriteOptions& options) {
    Manifest m;
    m.filing_id = filing.filing_id;
    m.document_id = document_id_for(filing.filing_id);
    if (m.document_id.empty()) throw Error("filing has no id");
    m.format = filing.format;
    m.split_pillar = options.split_pillar;
    m.split_block = options.split_block;
    m.block_count = filing.blocks.size();
    m.stages = options.stages;
    m.created_at = options.created_at.empty() ? utc_timestamp() : options.created_at;

    std::set<std::string> seen;
    for (const auto& r : records) {
        const std::string key = ItemKey{m.document_id, r.part, r.item_id}.render();
        if (!seen.insert(key).second) throw DuplicateKey("duplicate item key " + key);
        m.items.push_back({key, key + ".txt", r.part, r.item_id, r.method, r.title_block, r.content_range, r.title_text});
    }

    const fs::path dir = filing_dir(out_dir, m.document_id);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    // Drop item files a previous run wrote that this run no longer emits.
    if (fs::exists(dir / kManifestFile)) {
        try {
            for (const auto& old : read_manifest(dir).items) {
                if (!seen.count(old.key)) fs::remove(dir / old.file, ec);
            }
        } catch (const std::exception&) {
        }
    }
    for (std::size_t k = 0; k < records.size(); ++k) {
        write_file_atomic(dir / m.items[k].file, item_text(filing, records[k].content_range));
    }
    write_file_atomic(dir / kManifestFile, manifest_to_json(m).dump(2) + "\n");
    return m;
}

Manifest read_manifest(const fs::path& dir) {
    const auto path = dir / kManifestFile;
    if (!fs::exists(path)) throw NotFound("no manifest in " + dir.string());
    try {
        return manifest_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad manifest " + path.string() + ": " + e.what());
    }
}

std::vector<std::string> list_filings(const fs::path& out_dir) {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(out_dir, ec)) {
        if (entry.is_directory() && fs::exists(entry.path() / kManifestFile)) out.push_back(entry.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- overlay ----

namespace {

const ManifestItem& find_item(const Manifest& m, const std::string& key) {
    for (const auto& it : m.items) {
        if (it.key == key) return it;
    }
    throw NotFound("no item " + key);
}

fs::path edit_path(const fs::path& dir, const std::string& key) { return dir / "edits" / (key + ".txt"); }

}  // namespace

void put_edit(const fs::path& dir, const std::string& key, std::string_view text) {
    find_item(read_manifest(dir), key);
    std::error_code ec;
    fs::create_directories(dir / "edits", ec);
    if (ec) throw IoError("cannot create edits directory: " + ec.message());
    write_file_atomic(edit_path(dir, key), text);
    append_line(dir / "edits" / "edits.log",
                nlohmann::json{{"key", key}, {"at", utc_timestamp()}, {"bytes", text.size()}}.dump());
}

bool has_edit(const fs::path& dir, const std::string& key) { return fs::exists(edit_path(dir, key)); }

std::string effective_text(const fs::path& dir, const std::string& key) {
    const Manifest m = read_manifest(dir);
    const auto& item = find_item(m, key);
    if (has_edit(dir, key)) return read_file(edit_path(dir, key));
    return read_file(dir / item.file);
}

Manifest effective_manifest(const fs::path& dir) {
    Manifest m = read_manifest(dir);
    for (auto& it : m.items) {
        if (has_edit(dir, it.key)) it.method = itemize::Method::HumanEdited;
    }
    return m;
}

std::map<std::string, std::string> effective_texts(const fs::path& dir) {
    std::map<std::string, std::string> out;
    const Manifest m = read_manifest(dir);
    for (const auto& it : m.items) {
        out[it.key] = has_edit(dir, it.key) ? read_file(edit_path(dir, it.key)) : read_file(dir / it.file);
    }
    return out;
}

// ---- export ----

const char* to_string(ExportFormat f) {
    switch (f) {
        case ExportFormat::PlainDir: return "plain";
        case ExportFormat::JsonBundle: return "json";
        case ExportFormat::Csv: return "csv";
    }
    return "plain";
}

ExportFormat export_format_from_string(std::string_view s) {
    const auto lower = text::to_lower_ascii(s);
    if (lower == "plain" || lower == "plaindir" || lower == "txt") return ExportFormat::PlainDir;
    if (lower == "json" || lower == "jsonbundle") return ExportFormat::JsonBundle;
    if (lower == "csv") return ExportFormat::Csv;
    throw ConfigError("unknown export format: " + std::string(s));
}

std::string render_json_bundle(const std::map<std::string, std::string>& texts) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : texts) j[k] = v;
    return j.dump(2) + "\n";
}

std::map<std::string, std::string> parse_json_bundle(std::string_view data) {
    std::map<std::string, std::string> out;
    const auto j = nlohmann::json::parse(data);
    for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
    return out;
}

namespace {

std::string csv_field(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string render_csv(const std::map<std::string, std::string>& texts) {
    std::string out = "key,text\r\n";
    for (const auto& [k, v] : texts) {
        out += csv_field(k);
        out += ',';
        out += csv_field(v);
        out += "\r\n";
    }
    return out;
}

std::map<std::string, std::string> parse_csv(std::string_view data) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, field_started = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const char c = data[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            rows.push_back(std::move(row));
            row.clear();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw Error("unterminated quoted CSV field");
    if (field_started || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    std::map<std::string, std::string> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == 0 && rows[r].size() == 2 && rows[r][0] == "key" && rows[r][1] == "text") continue;
        if (rows[r].size() != 2) throw Error("CSV row " + std::to_string(r + 1) + " does not have 2 fields");
        out[rows[r][0]] = rows[r][1];
    }
    return out;
}

std::map<std::string, std::string> read_plain_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            out[entry.path().stem().string()] = read_file(entry.path());
    }
    return out;
}

fs::path export_items(const fs::path& dir, ExportFormat format) {
    const Manifest m = read_manifest(dir);
    const auto texts = effective_texts(dir);
    const fs::path export_dir = dir / "export";
    std::error_code ec;
    fs::create_directories(export_dir, ec);
    if (ec) throw IoError("cannot create " + export_dir.string() + ": " + ec.message());
    switch (format) {
        case ExportFormat::PlainDir: {
            const fs::path plain = export_dir / "plain";
            fs::remove_all(plain, ec);
            fs::create_directories(plain, ec);
            if (ec) throw IoError("cannot create " + plain.string() + ": " + ec.message());
            for (const auto& [k, v] : texts) write_file_atomic(plain / (k + ".txt"), v);
            return plain;
        }
        case ExportFormat::JsonBundle: {
            const fs::path p = export_dir / (m.document_id + ".json");
            write_file_atomic(p, render_json_bundle(texts));
            return p;
        }
        case ExportFormat::Csv: {
            const fs::path p = export_dir / (m.document_id + ".csv");
            write_file_atomic(p, render_csv(texts));
            return p;
        }
    }
    return export_dir;
}

}  // namespace tenq::store
