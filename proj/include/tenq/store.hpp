#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tenq/docmodel.hpp"
#include "tenq/itemize.hpp"

namespace tenq::store {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kManifestFile = "manifest.json";

struct ItemKey {
    std::string document_id;
    int part = 1;
    std::string item_id;

    std::string render() const;  // "{document_id}_{part}_{item_id}"
    static ItemKey parse(std::string_view key);
    friend bool operator==(const ItemKey&, const ItemKey&) = default;
};

// Accession-style ids lose their dashes; anything else passes through.
std::string document_id_for(std::string_view filing_id);

struct ManifestItem {
    std::string key;
    std::string file;
    int part = 1;
    std::string item_id;
    itemize::Method method = itemize::Method::RuleBased;
    std::size_t title_block = 0;
    BlockRange content_range;
    std::string title_text;
};

struct StageOutcome {
    std::string stage;    // ingest, normalize, partition, itemize_part1, ...
    std::string outcome;  // ok, failed, skipped, fallback
    std::string detail;
};

struct Manifest {
    int schema = kSchemaVersion;
    std::string filing_id;
    std::string document_id;
    FilingFormat format = FilingFormat::Html;
    std::optional<std::string> split_pillar;
    std::optional<std::size_t> split_block;
    std::size_t block_count = 0;
    std::vector<ManifestItem> items;
    std::vector<StageOutcome> stages;
    std::string created_at;
    std::string tool_version = kToolVersion;
};

nlohmann::json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);

std::string utc_timestamp();

struct WriteOptions {
    std::optional<std::string> split_pillar;
    std::optional<std::size_t> split_block;
    std::vector<StageOutcome> stages;
    std::string created_at;  // empty: now
};

// Writes out_dir/{document_id}/{key}.txt per record plus manifest.json.
// Throws DuplicateKey before touching the disk when two records share a key,
// IoError on filesystem failures.
Manifest write_items(const NormalizedDoc& filing, const std::vector<itemize::ItemRecord>& records,
                     const fs::path& out_dir, const WriteOptions& options = {});

// Block texts of a range joined by blank lines (markers and empty blocks skipped).
std::string item_text(const NormalizedDoc& doc, BlockRange range);

fs::path filing_dir(const fs::path& out_dir, std::string_view document_id);
Manifest read_manifest(const fs::path& filing_dir);
// Sorted document ids with a manifest under out_dir.
std::vector<std::string> list_filings(const fs::path& out_dir);

// ---- human edits overlay: {filing_dir}/edits/{key}.txt plus edits.log ----

void put_edit(const fs::path& filing_dir, const std::string& key, std::string_view text);
bool has_edit(const fs::path& filing_dir, const std::string& key);
// Edited text when present, else the extracted text. Throws NotFound for unknown keys.
std::string effective_text(const fs::path& filing_dir, const std::string& key);
// Manifest with method HumanEdited for every edited item.
Manifest effective_manifest(const fs::path& filing_dir);
std::map<std::string, std::string> effective_texts(const fs::path& filing_dir);

// ---- export ----

enum class ExportFormat { PlainDir, JsonBundle, Csv };

const char* to_string(ExportFormat f);
ExportFormat export_format_from_string(std::string_view s);

std::string render_json_bundle(const std::map<std::string, std::string>& texts);
std::string render_csv(const std::map<std::string, std::string>& texts);
std::map<std::string, std::string> parse_json_bundle(std::string_view data);
std::map<std::string, std::string> parse_csv(std::string_view data);
std::map<std::string, std::string> read_plain_dir(const fs::path& dir);

// Exports the effective texts of one filing under {filing_dir}/export/ and
// returns the written path (a directory for PlainDir).
fs::path export_items(const fs::path& filing_dir, ExportFormat format);

}  // namespace tenq::store
