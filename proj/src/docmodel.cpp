#include "tenq/docmodel.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "html_tokenizer.hpp"
#include "tenq/error.hpp"
#include "tenq/text_util.hpp"

namespace tenq {

const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::Paragraph: return "paragraph";
        case BlockKind::Heading: return "heading";
        case BlockKind::TableRow: return "table_row";
        case BlockKind::PageBreak: return "page_break";
        case BlockKind::Anchor: return "anchor";
        case BlockKind::Other: return "other";
    }
    return "other";
}

BlockKind block_kind_from_string(std::string_view s) {
    for (auto k : {BlockKind::Paragraph, BlockKind::Heading, BlockKind::TableRow, BlockKind::PageBreak,
                   BlockKind::Anchor, BlockKind::Other}) {
        if (s == to_string(k)) return k;
    }
    throw Error("unknown block kind: " + std::string(s));
}

namespace {

using html::Token;

bool one_of(std::string_view name, std::initializer_list<std::string_view> names) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_void(std::string_view n) {
    return one_of(n, {"br", "hr", "img", "meta", "link", "input", "col", "area", "base", "wbr", "param", "source"});
}

bool is_block_level(std::string_view n) {
    return one_of(n, {"address", "article", "aside", "blockquote", "body", "center", "dd",     "div",
                      "dl",      "dt",      "fieldset", "figure", "footer", "form", "h1",   "h2",
                      "h3",      "h4",      "h5",       "h6",     "header", "hr",   "html", "li",
                      "main",    "nav",     "ol",       "p",      "pre",    "section", "table", "tbody",
                      "thead",   "tfoot",   "tr",       "td",     "th",     "ul",   "caption", "br"});
}

bool is_heading(std::string_view n) {
    return n.size() == 2 && n[0] == 'h' && n[1] >= '1' && n[1] <= '6';
}

bool is_ignored(std::string_view n) { return one_of(n, {"head", "title", "script", "style", "noscript"}); }

struct StyleInfo {
    bool bold = false;
    std::optional<bool> centered;
    bool break_before = false;
    bool break_after = false;
};

bool is_page_break_value(std::string_view v) {
    return v.find("always") != std::string_view::npos || v.find("page") != std::string_view::npos ||
           v.find("left") != std::string_view::npos || v.find("right") != std::string_view::npos;
}

StyleInfo parse_style(std::string_view style) {
    StyleInfo info;
    std::string s = text::to_lower_ascii(style);
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t semi = s.find(';', pos);
        if (semi == std::string::npos) semi = s.size();
        std::string_view decl(s.data() + pos, semi - pos);
        pos = semi + 1;
        auto colon = decl.find(':');
        if (colon == std::string_view::npos) continue;
        auto prop = text::trim(decl.substr(0, colon));
        auto val = text::trim(decl.substr(colon + 1));
        if (auto bang = val.find('!'); bang != std::string_view::npos) val = text::trim(val.substr(0, bang));
        if (prop == "font-weight") {
            if (val == "bold" || val == "bolder") {
                info.bold = true;
            } else if (!val.empty() && std::isdigit(static_cast<unsigned char>(val[0]))) {
                info.bold = std::atoi(std::string(val).c_str()) >= 700;
            }
        } else if (prop == "font") {
            info.bold = info.bold || val.find("bold") != std::string_view::npos;
        } else if (prop == "text-align") {
            info.centered = val == "center";
        } else if (prop == "page-break-before" || prop == "break-before") {
            info.break_before = is_page_break_value(val);
        } else if (prop == "page-break-after" || prop == "break-after") {
            info.break_after = is_page_break_value(val);
        }
    }
    return info;
}

struct Frame {
    std::string name;
    bool bold = false;
    std::optional<bool> centered;
    bool break_after = false;
    bool ignored = false;
    std::optional<std::string> href;
};

struct Cell {
    std::string text;
    std::size_t lead = 0;
    std::size_t trail = 0;
    bool visible = false;
};

class HtmlNormalizer {
public:
    explicit HtmlNormalizer(std::string_view body) : body_(body) {}

    std::vector<Block> run() {
        html::Tokenizer tz(body_);
        Token tok;
        while (tz.next(tok)) {
            switch (tok.type) {
                case Token::Type::StartTag: on_start(tok); break;
                case Token::Type::EndTag: on_end(tok); break;
                case Token::Type::Text: on_text(tok); break;
                default: break;
            }
        }
        flush();
        return std::move(blocks_);
    }

private:
    bool in_row() const { return row_depth_ > 0; }
    bool ignoring() const { return ignore_depth_ > 0; }

    bool any_bold() const {
        return std::any_of(stack_.begin(), stack_.end(), [](const Frame& f) { return f.bold; });
    }

    bool resolve_centered() const {
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
            if (it->centered) return *it->centered;
        }
        return false;
    }

    BlockKind resolve_kind() const {
        if (in_row()) return BlockKind::TableRow;
        bool container = false;
        for (const auto& f : stack_) {
            if (is_heading(f.name)) return BlockKind::Heading;
            if (f.name != "html" && f.name != "body" && is_block_level(f.name)) container = true;
        }
        return container ? BlockKind::Paragraph : BlockKind::Other;
    }

    const std::optional<std::string>& current_href() const {
        static const std::optional<std::string> none;
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
            if (it->href) return it->href;
        }
        return none;
    }

    bool line_has_text() const {
        return std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.visible; }) ||
               current_.visible;
    }

    void close_cell() {
        if (current_.visible) cells_.push_back(std::move(current_));
        current_ = Cell{};
    }

    void push_block(Block b) {
        b.index = blocks_.size();
        blocks_.push_back(std::move(b));
    }

    void emit_marker(BlockKind kind, std::size_t offset, std::optional<std::string> anchor = {}) {
        Block b;
        b.kind = kind;
        b.anchor_name = std::move(anchor);
        b.source_span = {offset, offset};
        push_block(std::move(b));
    }

    void flush() {
        close_cell();
        if (!cells_.empty()) {
            Block b;
            std::string joined;
            for (std::size_t k = 0; k < cells_.size(); ++k) {
                if (k) joined.push_back('\t');
                joined += text::collapse_whitespace(cells_[k].text);
            }
            b.text = std::move(joined);
            b.bold = nonspace_chars_ > 0 && bold_chars_ * 2 >= nonspace_chars_;
            b.centered = line_centered_;
            b.kind = line_kind_;
            b.href = line_href_;
            b.left_spaces = cells_.front().lead;
            b.right_spaces = cells_.back().trail;
            b.source_span = {first_byte_, last_byte_end_};
            push_block(std::move(b));
        }
        cells_.clear();
        current_ = Cell{};
        nonspace_chars_ = bold_chars_ = 0;
        line_href_.reset();
        line_started_ = false;
        for (auto& [name, offset] : pending_anchors_) {
            emit_marker(BlockKind::Anchor, std::max(offset, last_byte_end_), name);
        }
        pending_anchors_.clear();
    }

    void on_anchor(const std::string& name, std::size_t offset) {
        if (line_has_text()) {
            pending_anchors_.emplace_back(name, offset);
        } else {
            emit_marker(BlockKind::Anchor, offset, name);
        }
    }

    void close_implicit(std::string_view name) {
        // Minimal tag-soup repair: a new paragraph/row/cell/item closes the
        // previous sibling that was left open.
        auto close_up_to = [&](std::initializer_list<std::string_view> targets,
                               std::initializer_list<std::string_view> barriers) {
            for (std::size_t k = stack_.size(); k-- > 0;) {
                if (one_of(stack_[k].name, barriers)) return;
                if (one_of(stack_[k].name, targets)) {
                    pop_to(k);
                    return;
                }
            }
        };
        if (name == "p" || name == "div" || name == "table" || is_heading(name) || name == "ul" ||
            name == "ol" || name == "hr") {
            close_up_to({"p"}, {"td", "th", "table", "div", "li", "body", "blockquote"});
        } else if (name == "tr") {
            close_up_to({"tr"}, {"table"});
        } else if (name == "td" || name == "th") {
            close_up_to({"td", "th"}, {"tr", "table"});
        } else if (name == "li") {
            close_up_to({"li"}, {"ul", "ol"});
        }
    }

    void pop_to(std::size_t k) {
        while (stack_.size() > k) pop_frame(end_offset_);
    }

    void pop_frame(std::size_t offset) {
        Frame f = std::move(stack_.back());
        stack_.pop_back();
        if (f.ignored) --ignore_depth_;
        if (f.name == "tr") {
            if (row_depth_ > 0) --row_depth_;
            if (row_depth_ == 0) flush();
            else close_cell();
        } else if (f.name == "td" || f.name == "th") {
            if (in_row()) close_cell();
        } else if (is_block_level(f.name) && !in_row()) {
            flush();
        }
        if (f.break_after && !in_row()) {
            flush();
            emit_marker(BlockKind::PageBreak, offset);
        }
    }

    void on_start(const Token& tok) {
        const std::string& name = tok.name;
        end_offset_ = tok.begin;
        close_implicit(name);

        Frame f;
        f.name = name;
        f.ignored = is_ignored(name);
        StyleInfo style;
        if (auto* s = tok.attr("style")) style = parse_style(*s);
        f.bold = style.bold || name == "b" || name == "strong" || name == "th" || is_heading(name);
        f.centered = style.centered;
        if (auto* a = tok.attr("align"); a && name != "table" && name != "img") {
            f.centered = text::to_lower_ascii(*a) == "center";
        }
        if (name == "center") f.centered = true;
        f.break_after = style.break_after;
        if (name == "a") {
            if (auto* h = tok.attr("href"); h && !h->empty() && (*h)[0] == '#') f.href = *h;
        }

        if (!ignoring()) {
            if (name == "tr") {
                if (in_row()) close_cell();
                else flush();
            } else if (name == "td" || name == "th") {
                if (in_row()) close_cell();
            } else if (name == "br") {
                if (in_row()) current_.text.push_back(' ');
                else flush();
            } else if (is_block_level(name) && !in_row()) {
                flush();
            }

            if (style.break_before && !in_row()) {
                flush();
                emit_marker(BlockKind::PageBreak, tok.begin);
            }
            if (name == "hr" && !in_row()) {
                flush();
                emit_marker(BlockKind::PageBreak, tok.begin);
            }
            const std::string* anchor = tok.attr("id");
            if (name == "a" && tok.attr("name")) anchor = tok.attr("name");
            if (anchor && !anchor->empty()) on_anchor(*anchor, tok.end);
        }

        if (name == "tr") ++row_depth_;
        if (is_void(name) || tok.self_closing) {
            if (f.break_after && !in_row() && !ignoring()) {
                flush();
                emit_marker(BlockKind::PageBreak, tok.end);
            }
            if (name == "tr" && row_depth_ > 0) --row_depth_;
            return;
        }
        if (f.ignored) ++ignore_depth_;
        stack_.push_back(std::move(f));
    }

    void on_end(const Token& tok) {
        end_offset_ = tok.begin;
        for (std::size_t k = stack_.size(); k-- > 0;) {
            if (stack_[k].name == tok.name) {
                while (stack_.size() > k) pop_frame(tok.begin);
                return;
            }
            // Do not let a stray end tag escape the current table cell.
            if ((tok.name != "td" && tok.name != "th" && tok.name != "tr" && tok.name != "table") &&
                (stack_[k].name == "td" || stack_[k].name == "th")) {
                return;
            }
        }
        if (tok.name == "br" && !ignoring()) {
            if (in_row()) current_.text.push_back(' ');
            else flush();
        }
    }

    void on_text(const Token& tok) {
        if (ignoring()) return;
        const bool bold = any_bold();
        std::string_view raw = body_.substr(tok.begin, tok.end - tok.begin);
        std::string piece;
        for (std::size_t i = 0; i < raw.size();) {
            std::size_t consumed = 0;
            piece.clear();
            if (raw[i] == '&' && html::decode_entity(raw, i, piece, consumed)) {
                // decoded
            } else {
                text::decode_utf8_at(raw, i, consumed);
                piece.assign(raw.substr(i, consumed));
            }
            std::size_t abs_begin = tok.begin + i;
            i += consumed;

            std::size_t cl = 1;
            char32_t cp = text::decode_utf8_at(piece, 0, cl);
            if (cp == 0xAD) continue;  // soft hyphen
            if (text::is_space_cp(cp)) {
                current_.text.push_back(' ');
                if (cp != '\n' && cp != '\r') {
                    if (current_.visible) ++current_.trail;
                    else ++current_.lead;
                }
                continue;
            }
            if (!line_started_) {
                line_started_ = true;
                first_byte_ = abs_begin;
                line_centered_ = resolve_centered();
                line_kind_ = resolve_kind();
            }
            if (!line_href_) {
                if (const auto& h = current_href()) line_href_ = h;
            }
            current_.visible = true;
            current_.trail = 0;
            current_.text += piece;
            last_byte_end_ = tok.begin + i;
            ++nonspace_chars_;
            if (bold) ++bold_chars_;
        }
    }

    std::string_view body_;
    std::vector<Block> blocks_;
    std::vector<Frame> stack_;
    int row_depth_ = 0;
    int ignore_depth_ = 0;
    std::size_t end_offset_ = 0;

    std::vector<Cell> cells_;
    Cell current_;
    bool line_started_ = false;
    std::size_t first_byte_ = 0;
    std::size_t last_byte_end_ = 0;
    std::size_t nonspace_chars_ = 0;
    std::size_t bold_chars_ = 0;
    bool line_centered_ = false;
    BlockKind line_kind_ = BlockKind::Other;
    std::optional<std::string> line_href_;
    std::vector<std::pair<std::string, std::size_t>> pending_anchors_;
};

}  // namespace

NormalizedDoc normalize_html(std::string_view body, std::string filing_id) {
    NormalizedDoc doc;
    doc.filing_id = std::move(filing_id);
    doc.format = FilingFormat::Html;
    doc.blocks = HtmlNormalizer(body).run();
    if (doc.blocks.empty()) {
        throw UnparsableHtml("no content blocks recovered from HTML body of '" + doc.filing_id + "'");
    }
    return doc;
}

bool is_centered_line(std::size_t left_spaces, std::size_t text_width, const TextLayout& layout) {
    if (left_spaces == 0 || text_width == 0) return false;
    const double width = static_cast<double>(layout.page_width);
    const double mid = static_cast<double>(left_spaces) + static_cast<double>(text_width) / 2.0;
    return std::abs(mid - width / 2.0) <= layout.center_tolerance * width + 1e-9;
}

namespace {

bool is_rule_line(std::string_view t) {
    if (t.size() < 10) return false;
    char c = t[0];
    if (c != '-' && c != '=') return false;
    return std::all_of(t.begin(), t.end(), [c](char x) { return x == c; });
}

}  // namespace

NormalizedDoc normalize_text(std::string_view body, std::string filing_id, const TextLayout& layout) {
    NormalizedDoc doc;
    doc.filing_id = std::move(filing_id);
    doc.format = FilingFormat::PlainText;

    auto push = [&](Block b) {
        b.index = doc.blocks.size();
        doc.blocks.push_back(std::move(b));
    };
    auto page_break = [&](std::size_t b, std::size_t e) {
        Block blk;
        blk.kind = BlockKind::PageBreak;
        blk.source_span = {b, e};
        push(std::move(blk));
    };

    auto segment = [&](std::size_t sb, std::size_t se) {
        std::string_view seg = body.substr(sb, se - sb);
        std::size_t lead_bytes = 0;
        std::size_t left_cols = 0;
        while (lead_bytes < seg.size() && (seg[lead_bytes] == ' ' || seg[lead_bytes] == '\t' ||
                                           seg[lead_bytes] == '\v' || seg[lead_bytes] == '\r')) {
            if (seg[lead_bytes] == '\t') left_cols = (left_cols / layout.tab_width + 1) * layout.tab_width;
            else if (seg[lead_bytes] != '\r') ++left_cols;
            ++lead_bytes;
        }
        std::size_t end = seg.size();
        std::size_t right = 0;
        while (end > lead_bytes && (seg[end - 1] == ' ' || seg[end - 1] == '\t' || seg[end - 1] == '\v' ||
                                    seg[end - 1] == '\r')) {
            if (seg[end - 1] != '\r') ++right;
            --end;
        }
        if (end == lead_bytes) return;
        std::string_view visible = seg.substr(lead_bytes, end - lead_bytes);
        const std::size_t vb = sb + lead_bytes;
        const std::size_t ve = sb + end;
        if (text::to_lower_ascii(visible) == "<page>" || is_rule_line(visible)) {
            page_break(vb, ve);
            return;
        }
        std::string collapsed = text::collapse_whitespace(visible);
        if (collapsed.empty()) return;
        Block b;
        b.text = std::move(collapsed);
        b.kind = BlockKind::Paragraph;
        b.left_spaces = left_cols;
        b.right_spaces = right;
        b.centered = is_centered_line(left_cols, text::utf8_length(visible), layout);
        b.source_span = {vb, ve};
        push(std::move(b));
    };

    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t nl = body.find('\n', pos);
        std::size_t line_end = nl == std::string_view::npos ? body.size() : nl;
        std::size_t seg_begin = pos;
        for (std::size_t k = pos; k < line_end; ++k) {
            if (body[k] == '\f') {
                segment(seg_begin, k);
                page_break(k, k + 1);
                seg_begin = k + 1;
            }
        }
        segment(seg_begin, line_end);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return doc;
}

NormalizedDoc normalize(std::string_view body, FilingFormat format, std::string filing_id) {
    return format == FilingFormat::Html ? normalize_html(body, std::move(filing_id))
                                        : normalize_text(body, std::move(filing_id));
}

nlohmann::json block_to_json(const Block& b) {
    nlohmann::json j;
    j["index"] = b.index;
    j["text"] = b.text;
    j["bold"] = b.bold;
    j["centered"] = b.centered;
    j["kind"] = to_string(b.kind);
    j["anchor_name"] = b.anchor_name ? nlohmann::json(*b.anchor_name) : nlohmann::json(nullptr);
    j["href"] = b.href ? nlohmann::json(*b.href) : nlohmann::json(nullptr);
    j["left_spaces"] = b.left_spaces;
    j["right_spaces"] = b.right_spaces;
    j["span"] = {b.source_span.begin, b.source_span.end};
    return j;
}

Block block_from_json(const nlohmann::json& j) {
    Block b;
    b.index = j.at("index").get<std::size_t>();
    b.text = j.at("text").get<std::string>();
    b.bold = j.at("bold").get<bool>();
    b.centered = j.at("centered").get<bool>();
    b.kind = block_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("anchor_name") && !j["anchor_name"].is_null()) b.anchor_name = j["anchor_name"].get<std::string>();
    if (j.contains("href") && !j["href"].is_null()) b.href = j["href"].get<std::string>();
    b.left_spaces = j.at("left_spaces").get<std::size_t>();
    b.right_spaces = j.at("right_spaces").get<std::size_t>();
    const auto& span = j.at("span");
    b.source_span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
    return b;
}

std::string dump_blocks_ndjson(const NormalizedDoc& doc) {
    std::string out;
    for (const auto& b : doc.blocks) {
        out += block_to_json(b).dump();
        out.push_back('\n');
    }
    return out;
}

}  // namespace tenq
