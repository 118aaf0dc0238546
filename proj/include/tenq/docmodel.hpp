#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tenq/ingest.hpp"

namespace tenq {

using ingest::FilingFormat;

// Half-open range of block indices.
struct BlockRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end > begin ? end - begin : 0; }
    bool empty() const { return end <= begin; }
    bool contains(std::size_t i) const { return i >= begin && i < end; }
    friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class BlockKind { Paragraph, Heading, TableRow, PageBreak, Anchor, Other };

const char* to_string(BlockKind k);
BlockKind block_kind_from_string(std::string_view s);

struct Block {
    std::size_t index = 0;
    std::string text;
    bool bold = false;
    bool centered = false;
    BlockKind kind = BlockKind::Paragraph;
    std::optional<std::string> anchor_name;
    std::optional<std::string> href;  // internal link target, with leading '#'
    std::size_t left_spaces = 0;
    std::size_t right_spaces = 0;
    SourceSpan source_span;

    bool is_marker() const { return kind == BlockKind::PageBreak || kind == BlockKind::Anchor; }
};

struct NormalizedDoc {
    std::string filing_id;
    FilingFormat format = FilingFormat::Html;
    std::vector<Block> blocks;

    std::size_t size() const { return blocks.size(); }
    BlockRange all() const { return {0, blocks.size()}; }
};

struct TextLayout {
    std::size_t page_width = 80;
    double center_tolerance = 0.10;  // fraction of page width
    std::size_t tab_width = 8;
};

// Spans in the returned document index into `body` exactly as passed in.
NormalizedDoc normalize_html(std::string_view body, std::string filing_id = {});
NormalizedDoc normalize_text(std::string_view body, std::string filing_id = {}, const TextLayout& layout = {});
NormalizedDoc normalize(std::string_view body, FilingFormat format, std::string filing_id = {});

// Text-line centering rule shared with the generator and the candidates oracle.
bool is_centered_line(std::size_t left_spaces, std::size_t text_width, const TextLayout& layout = {});

nlohmann::json block_to_json(const Block& b);
Block block_from_json(const nlohmann::json& j);

// One JSON object per block, newline-delimited.
std::string dump_blocks_ndjson(const NormalizedDoc& doc);

}  // namespace tenq
