#include <set>

#include "doctest.h"
#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/layout.hpp"
#include "tenq/partition.hpp"
#include "tenq/synthetic.hpp"
#include "test_support.hpp"

using namespace tenq;
using namespace tenq::eval;

TEST_CASE("same seed, same bytes") {
    const auto spec = SyntheticSpec::perturbed(12, 6, 0.4);
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto a = generate_filing(spec, i), b = generate_filing(spec, i);
        CHECK(a.raw == b.raw);
        CHECK(truth_to_json(a.truth) == truth_to_json(b.truth));
    }
    CHECK(generate_filing(spec, 0).raw != generate_filing(SyntheticSpec::perturbed(13, 6, 0.4), 0).raw);
    CHECK(generate_filing(spec, 0).filing_id != generate_filing(spec, 1).filing_id);
}

TEST_CASE("written corpora are byte-identical across runs") {
    testing::TempDir a, b;
    const auto spec = SyntheticSpec::perturbed(5, 4, 0.3);
    const auto ea = generate_corpus(spec, a.path());
    const auto eb = generate_corpus(spec, b.path());
    REQUIRE(ea.size() == 4);
    for (std::size_t i = 0; i < ea.size(); ++i) {
        CHECK(read_file(ea[i].raw_path) == read_file(eb[i].raw_path));
        CHECK(read_file(ea[i].truth_path) == read_file(eb[i].truth_path));
    }
    CHECK(read_file(a / "corpus.json") == read_file(b / "corpus.json"));
    const auto listed = list_corpus(a.path());
    REQUIRE(listed.size() == 4);
    std::set<std::string> ids;
    for (const auto& e : ea) ids.insert(e.filing_id);
    for (const auto& e : listed) {
        CHECK(ids.count(e.filing_id) == 1);
        CHECK(read_truth(e.truth_path).filing_id == e.filing_id);
    }
}

TEST_CASE("clean filings: full layout, hyperlink split, matching block counts") {
    const auto spec = SyntheticSpec::clean(9, 12);
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto f = generate_filing(spec, i);
        CAPTURE(f.filing_id);
        CHECK(f.filing_id.size() == 18);
        CHECK(f.truth.items.size() == canonical_layout().size());
        CHECK(f.truth.perturbations.empty());
        CHECK(f.truth.toc.has_value());
        const auto doc = testing::normalized(f);
        CHECK(doc.blocks.size() == f.truth.block_count);
        const auto r = partition::divide_parts(doc);
        REQUIRE(r.ok());
        CHECK(r.split().split.pillar == partition::Pillar::Hyperlink);
        CHECK(r.split().split.block_index == f.truth.split_block);
        for (const auto& item : f.truth.items) {
            CHECK(item.title_block < doc.blocks.size());
            CHECK(doc.blocks[item.title_block].text == item.title_text);
            CHECK(item.content_range.begin == item.title_block + 1);
        }
    }
}

TEST_CASE("perturbed truth stays consistent with the normalizer") {
    const auto spec = SyntheticSpec::perturbed(14, 30, 0.5);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto f = generate_filing(spec, i);
        for (const auto& p : f.truth.perturbations) seen.insert(p);
        const auto doc = testing::normalized(f);
        CHECK(doc.blocks.size() == f.truth.block_count);
        CHECK(doc.format == f.truth.format);
        for (const auto& item : f.truth.items) {
            REQUIRE(item.title_block < doc.blocks.size());
            CHECK(doc.blocks[item.title_block].text == item.title_text);
            CHECK(item.has_keyword == testing::oracle_has_item(item.title_text, item.item_id));
        }
        for (const auto& k : f.truth.keyword_blocks) CHECK(k.block < doc.blocks.size());
    }
    for (const char* p : {"omit_toc", "dangling_anchors", "reworded_titles", "in_paragraph_references",
                          "items_omitted", "plain_text", "unstyled_titles"}) {
        CHECK_MESSAGE(seen.count(p) == 1, p);
    }
}

TEST_CASE("padding reaches the requested size") {
    auto spec = SyntheticSpec::clean(6, 3);
    spec.target_bytes = 100 * 1024;
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const auto f = generate_filing(spec, i);
        const auto body = ingest::primary_document(ingest::strip_sgml_envelope(f.raw)).body;
        CHECK(body.size() >= 90 * 1024);
        CHECK(body.size() <= 130 * 1024);
    }
}

TEST_CASE("spec validation and json") {
    auto spec = SyntheticSpec::perturbed(3, 7, 0.25);
    spec.target_bytes = 5000;
    CHECK(spec_to_json(spec_from_json(spec_to_json(spec))) == spec_to_json(spec));
    spec.omit_toc = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.omit_toc = -0.1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    testing::TempDir out;
    CHECK_THROWS_AS(generate_corpus(spec, out / "c"), ConfigError);
}

TEST_CASE("truth json round trip") {
    const auto f = generate_filing(SyntheticSpec::perturbed(8, 1, 0.6), 0);
    const auto j = truth_to_json(f.truth);
    CHECK(truth_to_json(truth_from_json(j)) == j);
}

TEST_CASE("seed mixing") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(mix_seed(1, i));
    CHECK(seeds.size() == 1000);
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}
