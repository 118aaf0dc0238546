#include <algorithm>

#include "doctest.h"
#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/pipeline.hpp"
#include "tenq/store.hpp"
#include "test_support.hpp"

using namespace tenq;
using namespace tenq::store;

namespace {

const char* kFiling = "0000320193-19-000066";

NormalizedDoc doc_of(std::vector<std::string> texts) {
    NormalizedDoc d;
    d.filing_id = kFiling;
    for (auto& t : texts) {
        Block b;
        b.index = d.blocks.size();
        b.text = std::move(t);
        d.blocks.push_back(std::move(b));
    }
    return d;
}

itemize::ItemRecord rec(int part, std::string id, std::size_t title, BlockRange range) {
    itemize::ItemRecord r;
    r.filing_id = kFiling;
    r.part = part;
    r.item_id = std::move(id);
    r.title_block = title;
    r.content_range = range;
    r.title_text = "Item " + r.item_id;
    return r;
}

NormalizedDoc sample_doc() {
    return doc_of({"Item 1. Financial Statements", "Balance sheet, \"quoted\", commas", "line two\nwith newline",
                   "Item 2. MD&A", "Revenue rose.", "Item 1A. Risk Factors", "Risk, and more risk.", ""});
}

std::vector<itemize::ItemRecord> sample_records() {
    return {rec(1, "1", 0, {1, 3}), rec(1, "2", 3, {4, 5}), rec(2, "1A", 5, {6, 7}), rec(2, "6", 7, {8, 8})};
}

}  // namespace

TEST_CASE("keys and document ids") {
    CHECK(document_id_for(kFiling) == "000032019319000066");
    CHECK(document_id_for("custom-doc") == "custom-doc");
    const ItemKey k{"000032019319000066", 2, "1A"};
    CHECK(k.render() == "000032019319000066_2_1A");
    CHECK(ItemKey::parse(k.render()) == k);
    CHECK_THROWS(ItemKey::parse("abc_3_1"));
    CHECK_THROWS(ItemKey::parse("nounderscores"));
}

TEST_CASE("write_items lays out one file per record") {
    testing::TempDir out;
    const auto m = write_items(sample_doc(), sample_records(), out.path());
    const auto dir = filing_dir(out.path(), "000032019319000066");
    CHECK(fs::exists(dir / "000032019319000066_2_1A.txt"));
    CHECK(read_file(dir / "000032019319000066_1_1.txt") ==
          "Balance sheet, \"quoted\", commas\n\nline two\nwith newline");
    CHECK(read_file(dir / "000032019319000066_1_2.txt") == "Revenue rose.");
    CHECK(fs::file_size(dir / "000032019319000066_2_6.txt") == 0);
    CHECK(m.items.size() == 4);
    const auto back = read_manifest(dir);
    CHECK(manifest_to_json(back) == manifest_to_json(m));
    CHECK(list_filings(out.path()) == std::vector<std::string>{"000032019319000066"});
}

TEST_CASE("rewrites are idempotent and drop stale items") {
    testing::TempDir out;
    WriteOptions o;
    o.created_at = "2020-01-01T00:00:00Z";
    write_items(sample_doc(), sample_records(), out.path(), o);
    const auto dir = filing_dir(out.path(), "000032019319000066");
    const auto first = read_file(dir / kManifestFile);
    write_items(sample_doc(), sample_records(), out.path(), o);
    CHECK(read_file(dir / kManifestFile) == first);

    auto fewer = sample_records();
    fewer.pop_back();
    write_items(sample_doc(), fewer, out.path(), o);
    CHECK_FALSE(fs::exists(dir / "000032019319000066_2_6.txt"));
    CHECK(read_manifest(dir).items.size() == 3);
}

TEST_CASE("duplicate keys leave the disk untouched") {
    testing::TempDir out;
    auto records = sample_records();
    records.push_back(rec(1, "2", 4, {5, 5}));
    CHECK_THROWS_AS(write_items(sample_doc(), records, out.path()), DuplicateKey);
    CHECK(fs::is_empty(out.path()));
}

TEST_CASE("edits overlay the original text") {
    testing::TempDir out;
    write_items(sample_doc(), sample_records(), out.path());
    const auto dir = filing_dir(out.path(), "000032019319000066");
    const std::string key = "000032019319000066_1_2";
    const auto original = read_file(dir / (key + ".txt"));
    CHECK_FALSE(has_edit(dir, key));
    put_edit(dir, key, "Revenue fell.");
    CHECK(has_edit(dir, key));
    CHECK(effective_text(dir, key) == "Revenue fell.");
    CHECK(read_file(dir / (key + ".txt")) == original);
    for (const auto& it : effective_manifest(dir).items)
        CHECK((it.method == itemize::Method::HumanEdited) == (it.key == key));
    for (const auto& it : read_manifest(dir).items) CHECK(it.method == itemize::Method::RuleBased);
    CHECK(effective_texts(dir).at(key) == "Revenue fell.");
    CHECK_THROWS_AS(put_edit(dir, "000032019319000066_1_9", "x"), NotFound);
    CHECK_THROWS_AS(effective_text(dir, "000032019319000066_1_9"), NotFound);
}

TEST_CASE("exports agree with each other and with the store") {
    testing::TempDir out;
    write_items(sample_doc(), sample_records(), out.path());
    const auto dir = filing_dir(out.path(), "000032019319000066");
    put_edit(dir, "000032019319000066_2_1A", "edited, \"with\" quotes\r\nand CRLF");
    const auto texts = effective_texts(dir);

    const auto plain = read_plain_dir(export_items(dir, ExportFormat::PlainDir));
    const auto bundle = parse_json_bundle(read_file(export_items(dir, ExportFormat::JsonBundle)));
    const auto csv = parse_csv(read_file(export_items(dir, ExportFormat::Csv)));
    CHECK(plain == texts);
    CHECK(bundle == texts);
    CHECK(csv == texts);
    CHECK(bundle.size() == 4);
    CHECK(fs::exists(dir / "export" / "000032019319000066.json"));
    CHECK(fs::exists(dir / "export" / "000032019319000066.csv"));
    CHECK(read_file(dir / "export" / "000032019319000066.csv").rfind("key,text\r\n", 0) == 0);
}

TEST_CASE("CSV parsing edge cases") {
    const std::map<std::string, std::string> texts = {{"a", ""}, {"b", "x,y"}, {"c", "\"\""}, {"d", "l1\nl2"}};
    CHECK(parse_csv(render_csv(texts)) == texts);
    CHECK_THROWS(parse_csv("key,text\r\na,\"open\r\n"));
    CHECK_THROWS(parse_csv("key,text\r\na,b,c\r\n"));
    CHECK(export_format_from_string("csv") == ExportFormat::Csv);
    CHECK_THROWS_AS(export_format_from_string("xml"), ConfigError);
}

TEST_CASE("seven-item filing exports a seven-key bundle") {
    // Part I: 1, 2, 3, 4; Part II: 1, 1A, 6 present, everything else omitted.
    auto d = doc_of({"t", "a", "t", "b", "t", "c", "t", "d", "t", "e", "t", "f", "t", "g"});
    std::vector<itemize::ItemRecord> r = {rec(1, "1", 0, {1, 2}),  rec(1, "2", 2, {3, 4}),  rec(1, "3", 4, {5, 6}),
                                          rec(1, "4", 6, {7, 8}),  rec(2, "1", 8, {9, 10}), rec(2, "1A", 10, {11, 12}),
                                          rec(2, "6", 12, {13, 14})};
    testing::TempDir out;
    write_items(d, r, out.path());
    const auto dir = filing_dir(out.path(), "000032019319000066");
    const auto bundle = nlohmann::json::parse(read_file(export_items(dir, ExportFormat::JsonBundle)));
    CHECK(bundle.size() == 7);
    CHECK(bundle.at("000032019319000066_2_1A") == "f");
}

TEST_CASE("manifest json round trip") {
    Manifest m;
    m.filing_id = kFiling;
    m.document_id = "000032019319000066";
    m.split_pillar = "hyperlink";
    m.split_block = 42;
    m.block_count = 100;
    m.items.push_back({"000032019319000066_1_1", "000032019319000066_1_1.txt", 1, "1",
                       itemize::Method::ClassifierAssisted, 3, {4, 9}, "Item 1."});
    m.stages.push_back({"partition", "ok", "hyperlink"});
    m.created_at = "2020-01-01T00:00:00Z";
    const auto j = manifest_to_json(m);
    CHECK(manifest_to_json(manifest_from_json(j)) == j);
    auto bad = j;
    bad["schema"] = 99;
    CHECK_THROWS(manifest_from_json(bad));
}

TEST_CASE("pipeline results store with stage outcomes") {
    const auto f = eval::generate_filing(eval::SyntheticSpec::clean(3, 1), 0);
    const auto result = pipeline::process_raw(ingest::RawFiling{f.filing_id, "", "", f.raw, ingest::Source::LocalFile});
    testing::TempDir out;
    const auto m = pipeline::store_result(result, out.path());
    CHECK(m.items.size() == f.truth.items.size());
    CHECK(m.split_pillar == std::optional<std::string>("hyperlink"));
    CHECK_FALSE(m.stages.empty());
    for (const auto& it : m.items) {
        const auto& r = *std::find_if(result.records.begin(), result.records.end(),
                                      [&](const auto& x) { return x.part == it.part && x.item_id == it.item_id; });
        CHECK(read_file(filing_dir(out.path(), m.document_id) / it.file) == item_text(result.doc, r.content_range));
    }
}
