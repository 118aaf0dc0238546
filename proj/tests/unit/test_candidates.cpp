#include <set>

#include "doctest.h"
#include "tenq/candidates.hpp"
#include "tenq/itemize.hpp"
#include "tenq/partition.hpp"
#include "tenq/synthetic.hpp"
#include "tenq/text_util.hpp"
#include "test_support.hpp"

using namespace tenq;
using namespace tenq::candidates;

namespace {

std::vector<CanonicalItem> only(int part, const std::string& id) { return {*find_canonical(part, id)}; }

// Brute-force count of "item 1" occurrences that are not "item 1A", "item 10", etc.
std::size_t brute_force_item1(const std::string& text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::size_t n = 0;
    for (std::size_t at = lower.find("item 1"); at != std::string::npos; at = lower.find("item 1", at + 1)) {
        const char next = at + 6 < lower.size() ? lower[at + 6] : ' ';
        if (!std::isalnum(static_cast<unsigned char>(next))) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("every occurrence of the keyword is a candidate") {
    const std::string html =
        R"(<table><tr><td><a href="#a">Item 1. Legal Proceedings</a></td></tr><tr><td><a href="#b">Item 2.</a></td></tr>)"
        R"(<tr><td><a href="#c">Item 6.</a></td></tr></table>)"
        R"(<p align="center"><b>Item 1. Legal Proceedings.</b></p>)"
        R"(<p>We describe our litigation in Item 1 of this Part.</p>)"
        R"(<p>See also Note 9; item 1 above governs.</p>)"
        R"(<p>Item 1A. Risk Factors.</p><p>Item 10 does not exist.</p>)";
    const auto doc = normalize_html(html);
    const auto cands = find_candidates(doc, only(2, "1"));
    std::size_t oracle = 0;
    for (const auto& b : doc.blocks) oracle += brute_force_item1(b.text) > 0;
    CHECK(oracle == 4);
    CHECK(cands.size() == 4);
    for (std::size_t k = 1; k < cands.size(); ++k) CHECK(cands[k].block_index > cands[k - 1].block_index);
    for (const auto& c : cands) CHECK(text::to_lower_ascii(c.matched_text.substr(0, 4)) == "item");
}

TEST_CASE("no keyword, no candidates") {
    const auto doc = normalize_html("<p>Legal Proceedings</p><p>Itemized deductions.</p><p>Items 1 through 3.</p>");
    CHECK(find_candidates(doc, canonical_layout()).empty());
}

TEST_CASE("title and reference on the same page are both returned") {
    const auto doc = normalize_html(
        "<p><b>Item 2. Management's Discussion and Analysis</b></p><p>As explained under Item 2, revenue grew.</p>");
    const auto cands = find_candidates(doc, only(1, "2"));
    REQUIRE(cands.size() == 2);
    CHECK(extract_features(cands[0], doc).f_bold == 1);
    CHECK(extract_features(cands[1], doc).f_bold == 0);
    CHECK(extract_features(cands[1], doc).f_centered == 0);
}

TEST_CASE("features of a bold centered title") {
    const auto doc = normalize_html(R"(<b><p align="center">Item 6. Exhibits.</p></b>)");
    const auto cands = find_candidates(doc, only(2, "6"));
    REQUIRE(cands.size() == 1);
    CHECK(extract_features(cands[0], doc) == FeatureVector{1, 1, 0, 0, 17});
}

TEST_CASE("features of an indented text line") {
    const std::string title = "Item 3. Defaults Upon Senior Securities";
    const std::string line = std::string(12, ' ') + title + std::string(3, ' ');
    const auto doc = normalize_text("x\n" + line + "\n");
    const auto cands = find_candidates(doc, only(2, "3"));
    REQUIRE(cands.size() == 1);
    const auto f = extract_features(cands[0], doc);
    CHECK(f.f_bold == 0);
    CHECK(f.f_centered == int(is_centered_line(12, title.size())));
    CHECK(f.f_left_spaces == 12);
    CHECK(f.f_right_spaces == 3);
    CHECK(f.f_char_count == title.size());
}

TEST_CASE("character count starts at the keyword and counts code points") {
    const auto doc = normalize_html("<p>See Item 2. Management\xE2\x80\x99s Discussion</p>");
    const auto cands = find_candidates(doc, only(1, "2"));
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].matched_text == "Item 2. Management\xE2\x80\x99s Discussion");
    CHECK(extract_features(cands[0], doc).f_char_count == 31);
}

TEST_CASE("context windows") {
    std::string html;
    for (int i = 0; i < 9; ++i) html += "<p>Item " + std::to_string(i % 4 + 1) + ". Block " + std::to_string(i) + "</p>";
    const auto doc = normalize_html(html);
    Candidate first{0, 1, "1", "", {}};
    auto s = extract_context(first, doc, 2);
    CHECK(s.blocks.size() == 3);
    CHECK(s.candidate_offset == 0);
    Candidate mid{4, 1, "1", "", {}};
    s = extract_context(mid, doc, 2);
    CHECK(s.blocks.size() == 5);
    CHECK(s.candidate_offset == 2);
    CHECK(s.blocks[s.candidate_offset].index == 4);
    s = extract_context(mid, doc, 0);
    CHECK(s.blocks.size() == 1);
    CHECK(s.blocks[0].index == 4);
    Candidate last{8, 1, "1", "", {}};
    s = extract_context(last, doc, 3);
    CHECK(s.blocks.size() == 4);
    CHECK(s.candidate_offset == 3);
}

TEST_CASE("snippet and feature json round trip") {
    const auto doc = normalize_html(R"(<a name="x"></a><p align="center"><b>Item 1. Legal</b></p><p>text</p>)");
    const auto cands = find_candidates(doc, only(2, "1"));
    REQUIRE(cands.size() == 1);
    const auto j = snippet_to_json(cands[0].context);
    const auto back = snippet_from_json(j);
    CHECK(snippet_to_json(back) == j);
    CHECK(back.candidate_offset == cands[0].context.candidate_offset);
    const auto f = extract_features(cands[0], doc);
    CHECK(features_from_json(features_to_json(f)) == f);
    CHECK(FeatureVector::from_values(f.values()) == f);
}

TEST_CASE("synthetic corpus: superset, oracle agreement and determinism") {
    for (const auto& spec : {eval::SyntheticSpec::clean(61, 20), eval::SyntheticSpec::perturbed(62, 50, 0.4)}) {
        for (std::size_t i = 0; i < spec.n_filings; ++i) {
            const auto f = eval::generate_filing(spec, i);
            const auto doc = testing::normalized(f);
            CAPTURE(f.filing_id);
            const auto cands = find_candidates(doc, canonical_layout());
            std::set<std::pair<std::size_t, std::string>> found;
            for (const auto& c : cands) found.insert({c.block_index, c.item_id});
            for (const auto& t : f.truth.items)
                if (t.has_keyword) CHECK(found.count({t.title_block, t.item_id}) == 1);
            for (const auto& b : doc.blocks) {
                if (b.is_marker()) continue;
                for (const char* id : {"1", "1A", "2", "3", "4", "5", "6"}) {
                    CHECK(testing::oracle_has_item(b.text, id) == (found.count({b.index, id}) == 1));
                }
            }
            const auto again = find_candidates(doc, canonical_layout());
            REQUIRE(again.size() == cands.size());
            for (std::size_t k = 0; k < cands.size(); ++k)
                CHECK(extract_features(again[k], doc) == extract_features(cands[k], doc));

            const auto pr = partition::divide_parts(doc);
            if (!pr.ok()) continue;
            std::size_t accepted = 0;
            for (int part = 1; part <= 2; ++part) {
                const auto range = part == 1 ? pr.split().part1 : pr.split().part2;
                const auto r = itemize::identify_items(range, part, doc, pr.toc);
                if (itemize::succeeded(r)) accepted += std::get<std::vector<itemize::ItemRecord>>(r).size();
            }
            CHECK(cands.size() >= accepted);
        }
    }
}

TEST_CASE("references at probability one add candidates on every filing") {
    auto spec = eval::SyntheticSpec::clean(63, 30);
    spec.in_paragraph_references = 1.0;
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto f = eval::generate_filing(spec, i);
        const auto doc = testing::normalized(f);
        std::size_t outside_toc = 0;
        for (const auto& c : find_candidates(doc, canonical_layout()))
            outside_toc += !(f.truth.toc && f.truth.toc->contains(c.block_index));
        CAPTURE(f.filing_id);
        CHECK(find_candidates(doc, canonical_layout()).size() > f.truth.items.size());
        CHECK(outside_toc > f.truth.items.size());
    }
}
