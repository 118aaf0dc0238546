#include <regex>

#include "doctest.h"
#include "tenq/docmodel.hpp"
#include "tenq/fileio.hpp"
#include "tenq/synthetic.hpp"
#include "tenq/text_util.hpp"
#include "test_support.hpp"

using namespace tenq;

namespace {

std::vector<const Block*> content(const NormalizedDoc& d) {
    std::vector<const Block*> out;
    for (const auto& b : d.blocks)
        if (!b.is_marker()) out.push_back(&b);
    return out;
}

}  // namespace

TEST_CASE("bold centered paragraph") {
    const auto doc = normalize_html(R"(<b><p align="center">Item 6. Exhibits.</p></b>)");
    const auto c = content(doc);
    REQUIRE(c.size() == 1);
    CHECK(c[0]->text == "Item 6. Exhibits.");
    CHECK(c[0]->bold);
    CHECK(c[0]->centered);
}

TEST_CASE("inline style weight and alignment") {
    const auto doc = normalize_html(
        R"(<p style="font-weight:700;text-align:center">A</p><p style="font-weight: bold">B</p>)"
        R"(<p style="font-weight:400">C</p><div style="margin-left:auto;margin-right:auto;width:50%">D</div>)");
    const auto c = content(doc);
    REQUIRE(c.size() == 4);
    CHECK((c[0]->bold && c[0]->centered));
    CHECK((c[1]->bold && !c[1]->centered));
    CHECK_FALSE(c[2]->bold);
    CHECK_FALSE(c[3]->centered);
}

TEST_CASE("horizontal rule then page-break paragraph") {
    const auto doc = normalize_html(R"(<p>before</p><hr><p style="page-break-before:always"></p><p>after</p>)");
    std::vector<BlockKind> kinds;
    for (const auto& b : doc.blocks) kinds.push_back(b.kind);
    REQUIRE(doc.size() == 4);
    CHECK(kinds[1] == BlockKind::PageBreak);
    CHECK(kinds[2] == BlockKind::PageBreak);
    for (const auto& b : doc.blocks)
        if (b.kind == BlockKind::PageBreak) CHECK(b.text.empty());
}

TEST_CASE("anchors, links and tables") {
    const auto doc = normalize_html(
        R"(<table><tr><td><a href="#part_ii">Part II</a></td><td>12</td></tr></table>)"
        R"(<a name="part_ii"></a><h2>PART II &mdash; OTHER&nbsp;INFORMATION</h2>)");
    REQUIRE(doc.size() == 3);
    CHECK(doc.blocks[0].kind == BlockKind::TableRow);
    CHECK(doc.blocks[0].text == "Part II\t12");
    CHECK(doc.blocks[0].href == std::optional<std::string>("#part_ii"));
    CHECK(doc.blocks[1].kind == BlockKind::Anchor);
    CHECK(doc.blocks[1].anchor_name == std::optional<std::string>("part_ii"));
    CHECK(doc.blocks[2].kind == BlockKind::Heading);
    CHECK(doc.blocks[2].text == "PART II \xE2\x80\x94 OTHER INFORMATION");
}

TEST_CASE("tag soup never fails") {
    const auto doc = normalize_html("<P><B>Item 2.<P>Unclosed <TD>cell <i>x</b> tail</FONT></DIV></P>");
    CHECK(doc.size() >= 2);
    for (const auto& b : doc.blocks) {
        CHECK(b.text == std::string(text::trim(b.text)));
    }
}

TEST_CASE("cover page fixture") {
    const std::string path = std::string(TENQ_FIXTURES_DIR) + "/cover_page.htm";
    const auto doc = normalize_html(read_file(path));
    const auto c = content(doc);
    REQUIRE_FALSE(c.empty());
    CHECK(c.front()->text.find("UNITED STATES") != std::string::npos);
    CHECK(doc.size() > 50);
}

TEST_CASE("plain text centering and margins") {
    const std::string centered = std::string(30, ' ') + std::string(20, 'X');
    const auto doc = normalize_text(centered + "\nItem 1. Financial Statements.\n");
    REQUIRE(doc.size() == 2);
    CHECK(doc.blocks[0].centered);
    CHECK(doc.blocks[0].left_spaces == 30);
    CHECK_FALSE(doc.blocks[1].centered);
    CHECK(doc.blocks[1].left_spaces == 0);
    CHECK_FALSE(doc.blocks[1].bold);
}

TEST_CASE("centering rule matches a direct midpoint computation") {
    for (std::size_t left = 0; left < 80; ++left) {
        for (std::size_t width = 1; left + width <= 100; width += 3) {
            const double mid = double(left) + double(width) / 2.0;
            const bool oracle = left > 0 && mid >= 32.0 && mid <= 48.0;
            CHECK(is_centered_line(left, width) == oracle);
        }
    }
}

TEST_CASE("form feeds and rule lines are page breaks") {
    const auto doc = normalize_text("one\n\f\ntwo\n----------\nthree\n=========\n   spaced   \n");
    std::vector<BlockKind> kinds;
    for (const auto& b : doc.blocks) kinds.push_back(b.kind);
    REQUIRE(doc.size() == 7);
    CHECK(kinds[1] == BlockKind::PageBreak);
    CHECK(kinds[3] == BlockKind::PageBreak);
    CHECK(kinds[5] == BlockKind::Paragraph);  // nine '=' is not a rule
    CHECK(doc.blocks[5].text == "=========");
    CHECK(doc.blocks[6].text == "spaced");
    const auto body = std::string("   spaced   ");
    const auto d2 = normalize_text(body);
    CHECK(d2.blocks[0].left_spaces == 3);
    CHECK(d2.blocks[0].right_spaces == 3);
}

TEST_CASE("block json round trip") {
    const auto doc = normalize_html(R"(<a name="x"></a><p align=center><b>Item 1</b></p>)");
    for (const auto& b : doc.blocks) {
        const Block back = block_from_json(block_to_json(b));
        CHECK(block_to_json(back) == block_to_json(b));
    }
    const std::string dump = dump_blocks_ndjson(doc);
    CHECK(std::count(dump.begin(), dump.end(), '\n') == long(doc.size()));
}

TEST_CASE("synthetic corpus: spans, coverage and idempotence") {
    const auto spec = eval::SyntheticSpec::perturbed(41, 24, 0.4);
    const std::regex tag("<[^>]*>");
    // Elements whose content is never rendered.
    const std::regex hidden("<(head|title|style|script)\\b[^>]*>[\\s\\S]*?</\\1\\s*>", std::regex::icase);
    const std::regex blanks("[ \\t]+");
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto f = eval::generate_filing(spec, i);
        const auto docs = ingest::strip_sgml_envelope(f.raw);
        const std::string body = ingest::decode_body(ingest::primary_document(docs).body);
        const auto doc = normalize(body, ingest::classify_format(body), f.filing_id);
        CAPTURE(f.filing_id);
        REQUIRE_FALSE(doc.blocks.empty());

        // Spans strictly increase and do not overlap.
        for (std::size_t k = 0; k < doc.size(); ++k) {
            CHECK(doc.blocks[k].index == k);
            CHECK(doc.blocks[k].source_span.begin <= doc.blocks[k].source_span.end);
            if (k > 0) CHECK(doc.blocks[k - 1].source_span.end <= doc.blocks[k].source_span.begin);
        }

        // Every visible byte outside markup lies inside some content block's span.
        std::vector<bool> markup(body.size(), false);
        if (doc.format == FilingFormat::Html)
            for (const auto* re : {&tag, &hidden})
                for (auto it = std::sregex_iterator(body.begin(), body.end(), *re); it != std::sregex_iterator(); ++it)
                    for (std::size_t k = 0; k < std::size_t(it->length()); ++k)
                        markup[std::size_t(it->position()) + k] = true;
        std::vector<bool> covered(body.size(), false);
        for (const auto& b : doc.blocks) {
            // In plain text, page-break lines play the role of markup.
            const bool is_break = b.kind == BlockKind::PageBreak;
            if (is_break && doc.format == FilingFormat::Html) continue;
            for (std::size_t k = b.source_span.begin; k < b.source_span.end; ++k) (is_break ? markup : covered)[k] = true;
        }
        std::size_t missing = 0;
        for (std::size_t k = 0; k < body.size(); ++k) {
            const unsigned char ch = static_cast<unsigned char>(body[k]);
            if (markup[k] || std::isspace(ch)) continue;
            missing += !covered[k];
        }
        CHECK(missing == 0);

        // Texts re-normalized as plain text come back unchanged up to whitespace runs.
        std::string joined;
        std::vector<std::string> texts;
        for (const auto* b : content(doc)) {
            if (b->text.empty()) continue;
            texts.push_back(std::regex_replace(b->text, blanks, " "));
            joined += b->text + "\n";
        }
        std::vector<std::string> again;
        for (const auto& b : normalize_text(joined).blocks)
            if (!b.is_marker()) again.push_back(b.text);
        CHECK(again == texts);
    }
}

TEST_CASE("an extra bold ancestor never clears bold") {
    const std::vector<std::string> fixtures = {
        R"(<p>plain</p>)",
        R"(<p><b>bold</b></p>)",
        R"(<p style="font-weight:700">styled</p>)",
        R"(<div><span style="font-weight:normal">reset</span></div>)",
        R"(<table><tr><td><strong>cell</strong></td></tr></table>)",
        R"(<p align="center"><font style="font-weight:bold">Item 2.</font></p>)",
    };
    for (const auto& f : fixtures) {
        const auto plain = normalize_html(f);
        const auto wrapped = normalize_html("<b>" + f + "</b>");
        const auto a = content(plain), b = content(wrapped);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k]->bold) CHECK(b[k]->bold);
        }
    }
}
