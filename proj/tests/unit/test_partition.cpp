#include "doctest.h"
#include "tenq/partition.hpp"
#include "tenq/synthetic.hpp"
#include "test_support.hpp"

using namespace tenq;
using namespace tenq::partition;

namespace {

std::size_t find_text(const NormalizedDoc& doc, const std::string& text) {
    for (const auto& b : doc.blocks)
        if (b.text == text) return b.index;
    FAIL("no block with text " << text);
    return 0;
}

std::string toc(const std::string& part2_target) {
    return R"(<table>)"
           R"(<tr><td><a href="#part1">Part I</a></td><td>3</td></tr>)"
           R"(<tr><td><a href="#i1">Item 1. Financial Statements</a></td><td>3</td></tr>)"
           R"(<tr><td><a href="#i4">Item 4. Controls and Procedures</a></td><td>9</td></tr>)"
           R"(<tr><td><a href="#)" + part2_target + R"(">Part II</a></td><td>10</td></tr>)"
           R"(<tr><td><a href="#ii1">Item 1. Legal Proceedings</a></td><td>10</td></tr>)"
           R"(<tr><td><a href="#ii6">Item 6. Exhibits</a></td><td>12</td></tr>)"
           R"(</table>)";
}

std::string part1_body() {
    return R"(<a name="part1"></a><p align="center"><b>PART I. FINANCIAL INFORMATION</b></p>)"
           R"(<a name="i1"></a><p><b>Item 1. Financial Statements.</b></p><p>Balance sheet.</p>)"
           R"(<a name="i4"></a><p><b>Item 4. Controls and Procedures.</b></p><p>Effective.</p>)";
}

std::string part2_body(bool bold_heading, const std::string& anchor = "part2") {
    const std::string heading = bold_heading ? "<p><b>PART II. OTHER INFORMATION</b></p>" : "<p>Other information follows.</p>";
    return R"(<hr><a name=")" + anchor + R"("></a>)" + heading +
           R"(<a name="ii1"></a><p><b>Item 1. Legal Proceedings.</b></p><p>None.</p>)"
           R"(<a name="ii6"></a><p><b>Item 6. Exhibits.</b></p><p>31.1 Certification.</p>)";
}

}  // namespace

TEST_CASE("hyperlink pillar wins and short-circuits") {
    const auto doc = normalize_html("<p>Cover</p>" + toc("part2") + part1_body() + part2_body(true));
    const auto sp = pillar_hyperlink(doc);
    REQUIRE(sp);
    CHECK(sp->pillar == Pillar::Hyperlink);
    CHECK(sp->block_index == find_text(doc, "PART II. OTHER INFORMATION"));

    const auto r = divide_parts(doc);
    REQUIRE(r.ok());
    CHECK(r.split().split.pillar == Pillar::Hyperlink);
    CHECK(r.trace.size() == 1);
    CHECK(r.split().part1.begin == find_text(doc, "PART I. FINANCIAL INFORMATION"));
    CHECK(r.split().part1.end == r.split().part2.begin);
    CHECK(r.split().part2.end == doc.size());
}

TEST_CASE("no internal links means no hyperlink split") {
    const auto doc = normalize_html("<p>Cover</p>" + part1_body() + part2_body(true));
    CHECK_FALSE(find_toc_region(doc));
    CHECK_FALSE(pillar_hyperlink(doc));
}

TEST_CASE("dangling TOC anchor falls through to the regex pillar") {
    const auto doc = normalize_html("<p>Cover</p>" + toc("part2") + part1_body() + part2_body(true, "elsewhere"));
    CHECK_FALSE(pillar_hyperlink(doc));
    const auto r = divide_parts(doc);
    REQUIRE(r.ok());
    CHECK(r.split().split.pillar == Pillar::Regex);
    CHECK(r.split().split.block_index == find_text(doc, "PART II. OTHER INFORMATION"));
    REQUIRE(r.trace.size() == 2);
    CHECK(r.trace[0].outcome == PillarAttempt::Outcome::NotFound);
}

TEST_CASE("regex pillar qualification") {
    SUBCASE("bold canonical heading") {
        const auto doc = normalize_html("<p>x</p><p><b>PART II \xE2\x80\x94 OTHER INFORMATION</b></p>");
        const auto sp = pillar_regex(doc);
        REQUIRE(sp);
        CHECK(sp->pillar == Pillar::Regex);
        CHECK(sp->block_index == 1);
    }
    SUBCASE("variants") {
        for (const char* h : {"Part 2 - Other Information", "PART II.", "Part II: Other Information", "PART  II"}) {
            const auto doc = normalize_html(std::string("<p>x</p><h3>") + h + "</h3>");
            CHECK_MESSAGE(pillar_regex(doc).has_value(), h);
        }
    }
    SUBCASE("references in body text are ignored") {
        const auto doc = normalize_html(
            "<p>x</p><p>Risks are discussed in Part II of this report.</p><p>Part II of this report discusses litigation.</p>");
        CHECK_FALSE(pillar_regex(doc));
    }
    SUBCASE("a PART II that only appears in the TOC") {
        std::string html = "<p>Cover</p>";
        for (const char* t : {"PART I", "Item 1. Financial Statements", "Item 2. Discussion", "Item 3. Market Risk",
                              "Item 4. Controls", "PART II", "Item 1. Legal Proceedings", "Item 1A. Risk Factors",
                              "Item 2. Sales", "Item 6. Exhibits"})
            html += std::string("<p align=\"center\"><b>") + t + "</b></p>";
        for (int i = 0; i < 30; ++i) html += "<p>Narrative paragraph " + std::to_string(i) + ".</p>";
        const auto doc = normalize_html(html);
        const auto region = find_toc_region(doc);
        REQUIRE(region);
        CHECK(region->contains(find_text(doc, "PART II")));
        CHECK_FALSE(pillar_regex(doc));
    }
}

TEST_CASE("page header pillar") {
    SUBCASE("part heading after a page break") {
        const auto doc = normalize_html("<p>x</p><hr><p>PART II</p><p>text</p>");
        const auto sp = pillar_page_header(doc);
        REQUIRE(sp);
        CHECK(sp->pillar == Pillar::PageHeader);
        CHECK(sp->confidence == Confidence::Heuristic);
        CHECK(sp->block_index == find_text(doc, "PART II"));
    }
    SUBCASE("Part II item title without any PART II") {
        const auto doc = normalize_html("<p>Item 4. Controls.</p><p>text</p><hr><p>Item 1. Legal Proceedings.</p><p>None.</p>");
        const auto sp = pillar_page_header(doc);
        REQUIRE(sp);
        CHECK(sp->block_index == find_text(doc, "Item 1. Legal Proceedings."));
    }
    SUBCASE("only the first three blocks of a page count") {
        const auto doc = normalize_html("<p>a</p><hr><p>b</p><p>c</p><p>d</p><p>PART II</p>");
        CHECK_FALSE(pillar_page_header(doc));
    }
    SUBCASE("no page breaks") {
        const auto doc = normalize_html("<p>a</p><p>PART II</p><p>Legal Proceedings</p>");
        CHECK_FALSE(pillar_page_header(doc));
    }
}

TEST_CASE("no Part II markers at all") {
    const auto doc = normalize_html("<p>Cover</p><p><b>Item 1. Financial Statements.</b></p><p>text</p><hr><p>more</p>");
    const auto r = divide_parts(doc);
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure().reason == PartitionFailure::Reason::NoSplit);
    CHECK(r.trace.size() == 3);
}

TEST_CASE("validation rejects a split whose Part II lacks item keywords") {
    const auto doc = normalize_html("<p>Cover</p><p><b>Item 1. Financial Statements.</b></p><p><b>PART II</b></p><p>Nothing.</p>");
    const auto r = divide_parts(doc);
    CHECK_FALSE(r.ok());
    REQUIRE(r.trace.size() >= 2);
    CHECK(r.trace[1].outcome == PillarAttempt::Outcome::Rejected);
}

TEST_CASE("budget is enforced on a fake clock") {
    std::string html;
    for (int i = 0; i < 5000; ++i) html += "<p>Filler paragraph " + std::to_string(i) + "</p>";
    const auto doc = normalize_html(html);
    const auto tick = std::chrono::microseconds(1);
    const auto budget = std::chrono::microseconds(500);
    FakeClock clock(tick);
    const auto t0 = clock.now();
    const auto r = divide_parts(doc, budget, clock);
    const auto elapsed = clock.now() - t0;
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure().reason == PartitionFailure::Reason::Timeout);
    CHECK(elapsed <= budget + 5 * tick);

    FakeClock frozen;
    const auto r2 = divide_parts(doc, budget, frozen);
    REQUIRE_FALSE(r2.ok());
    CHECK(r2.failure().reason == PartitionFailure::Reason::NoSplit);
}

TEST_CASE("clean corpus: every filing splits by hyperlink at the truth block") {
    const auto spec = eval::SyntheticSpec::clean(5, 30);
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto f = eval::generate_filing(spec, i);
        const auto doc = testing::normalized(f);
        const auto r = divide_parts(doc);
        CAPTURE(f.filing_id);
        REQUIRE(r.ok());
        CHECK(r.split().split.pillar == Pillar::Hyperlink);
        CHECK(r.split().split.block_index == f.truth.split_block);
        CHECK(r.split().part1.begin == f.truth.part1_start);
    }
}

TEST_CASE("pillars that answer agree on the page") {
    const auto spec = eval::SyntheticSpec::clean(6, 30);
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto f = eval::generate_filing(spec, i);
        const auto doc = testing::normalized(f);
        const auto region = find_toc_region(doc);
        std::vector<std::size_t> page(doc.size());
        std::size_t p = 0;
        for (const auto& b : doc.blocks) {
            if (b.kind == BlockKind::PageBreak) ++p;
            page[b.index] = p;
        }
        std::vector<std::size_t> pages;
        for (const auto& sp : {pillar_hyperlink(doc, region), pillar_regex(doc, region), pillar_page_header(doc, region)})
            if (sp) pages.push_back(page[sp->block_index]);
        CAPTURE(f.filing_id);
        REQUIRE_FALSE(pages.empty());
        for (auto q : pages) CHECK(q == pages.front());
    }
}

TEST_CASE("trace json") {
    const auto doc = normalize_html("<p>Cover</p>" + toc("part2") + part1_body() + part2_body(true, "elsewhere"));
    const auto j = trace_to_json(divide_parts(doc));
    CHECK(j.dump().find("regex") != std::string::npos);
}
