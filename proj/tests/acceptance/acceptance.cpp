// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tenq/candidates.hpp"
#include "tenq/classifiers.hpp"
#include "tenq/fileio.hpp"
#include "tenq/itemize.hpp"
#include "tenq/layout.hpp"
#include "tenq/metrics.hpp"
#include "tenq/partition.hpp"
#include "tenq/pipeline.hpp"
#include "tenq/store.hpp"
#include "tenq/synthetic.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace tenq;
using Wall = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Wall::time_point t0) { return std::chrono::duration<double>(Wall::now() - t0).count(); }

std::string fmt(double x, int places = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, x);
    return buf;
}

std::vector<eval::SyntheticFiling> generate(const eval::SyntheticSpec& spec) {
    std::vector<eval::SyntheticFiling> out;
    for (std::size_t i = 0; i < spec.n_filings; ++i) out.push_back(eval::generate_filing(spec, i));
    return out;
}

// ---- 1: precision from confusion counts ----
Outcome precision_from_counts() {
    const auto m = eval::confusion_metrics(3518, 10, 7, 2035);
    const double oracle = 3518.0 / (3518.0 + 10.0);
    const double p = m.precision.value();
    const bool pass = std::abs(p - 0.9972) <= 0.00005 && std::abs(p - oracle) < 1e-12;
    return {pass, "precision=" + fmt(p, 6) + " oracle=" + fmt(oracle, 6) + " published=0.9972"};
}

// ---- 2: coverage composition ----
Outcome coverage_composition() {
    const double overall = eval::coverage_compose(0.9543, 0.9972, 0.0457, 0.834);
    const double rule = eval::coverage_compose(0.9543, 0.9972, 0.0, 0.0);
    const double oracle = 0.9543 * 0.9972 + 0.0457 * 0.834;
    const bool pass = std::abs(overall - 0.9897) <= 0.0001 && std::abs(rule - 0.9516) <= 0.0001 &&
                      std::abs(overall - oracle) < 1e-12;
    return {pass, "overall=" + fmt(overall, 6) + " rule_part=" + fmt(rule, 6)};
}

// ---- 3: clean corpus, rule-based only ----
Outcome clean_corpus() {
    const auto filings = generate(eval::SyntheticSpec::clean(7, 200));
    const auto t0 = Wall::now();
    const auto run = pipeline::run_corpus(filings, {}, std::nullopt, 1);
    const double secs = seconds_since(t0);
    const auto& r = run.report;
    const bool pass = r.exact_filings == 200 && r.rule_based_success_rate == 1.0 && r.fallback_records == 0 && secs < 30.0;
    return {pass, "exact=" + std::to_string(r.exact_filings) + "/200 rule_success=" + fmt(r.rule_based_success_rate) +
                      " time=" + fmt(secs, 2) + "s (limit 30s)"};
}

// ---- 4: perturbed corpus, fallback ablation ----
using RecordKey = std::tuple<std::string, int, std::string, std::size_t, std::size_t, std::size_t>;

RecordKey key_of(const itemize::ItemRecord& r) {
    return {r.filing_id, r.part, r.item_id, r.title_block, r.content_range.begin, r.content_range.end};
}

Outcome fallback_ablation() {
    const auto t0 = Wall::now();
    const auto filings = generate(eval::SyntheticSpec::perturbed(11, 200, 0.2));
    const auto data = pipeline::make_training_set(11, 1000);
    const auto split = classifiers::split_dataset(data, 11);
    const auto model = classifiers::train(split.train, classifiers::ModelKind::Logistic, 11);

    pipeline::Options rule_only;
    pipeline::Options with_fallback;
    with_fallback.fallback = pipeline::local_classifier(model);

    std::size_t rule_correct = 0, fallback_correct = 0, lost = 0, fallback_filings = 0;
    for (const auto& f : filings) {
        ingest::RawFiling raw;
        raw.accession_id = f.filing_id;
        raw.bytes = f.raw;
        const auto a = pipeline::process_raw(raw, rule_only);
        const auto b = pipeline::process_raw(raw, with_fallback);
        fallback_filings += b.used_fallback;
        std::set<RecordKey> correct_b;
        for (const auto& r : b.records) {
            if (pipeline::record_correct(r, f.truth)) {
                correct_b.insert(key_of(r));
                ++fallback_correct;
            }
        }
        for (const auto& r : a.records) {
            if (!pipeline::record_correct(r, f.truth)) continue;
            ++rule_correct;
            if (!correct_b.count(key_of(r))) ++lost;
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = fallback_correct > rule_correct && lost == 0 && secs < 120.0;
    return {pass, "correct records rule_only=" + std::to_string(rule_correct) + " with_fallback=" +
                      std::to_string(fallback_correct) + " lost=" + std::to_string(lost) + " fallback_filings=" +
                      std::to_string(fallback_filings) + " time=" + fmt(secs, 2) + "s incl. training (limit 120s)"};
}

// ---- 5: throughput on ~100 KB HTML filings ----
Outcome throughput() {
    auto spec = eval::SyntheticSpec::clean(21, 40);
    spec.target_bytes = 100 * 1024;
    const auto filings = generate(spec);
    testing::TempDir out;
    std::vector<double> secs;
    double bytes = 0;
    for (const auto& f : filings) {
        const auto docs = ingest::strip_sgml_envelope(f.raw);
        const std::string body(ingest::primary_document(docs).body);
        bytes += static_cast<double>(body.size());
        const auto t0 = Wall::now();
        const auto result = pipeline::process_body(body, f.filing_id);
        pipeline::store_result(result, out.path());
        secs.push_back(seconds_since(t0));
        if (result.doc.format != FilingFormat::Html) return {false, "filing " + f.filing_id + " did not render as HTML"};
    }
    const auto t = pipeline::summarize_timings(secs);
    const double mean_kb = bytes / static_cast<double>(filings.size()) / 1024.0;
    const bool pass = t.median_s < 0.1 && mean_kb >= 90.0 && mean_kb <= 130.0;
    return {pass, "median=" + fmt(t.median_s, 4) + "s p95=" + fmt(t.p95_s, 4) + "s mean_body=" + fmt(mean_kb, 1) +
                      "KB n=" + std::to_string(t.count)};
}

// ---- 6: classical models ----
Outcome classical_models() {
    const auto data = pipeline::make_training_set(3, 1000);
    const auto split = classifiers::split_dataset(data, 3);
    const double baseline = classifiers::majority_baseline(split.train, split.test);
    bool pass = split.train.size() == 800 && split.validation.size() == 100 && split.test.size() == 100;
    std::string detail = "baseline=" + fmt(baseline, 3);
    for (auto kind : classifiers::all_kinds()) {
        const auto model = classifiers::train(split.train, kind, 3);
        const double acc = classifiers::evaluate(model, split.test).accuracy.value();
        detail += std::string(" ") + classifiers::to_string(kind) + "=" + fmt(acc, 3);
        pass = pass && acc >= 0.9 && acc >= baseline;
    }
    return {pass, detail};
}

// ---- 7: properties ----
std::vector<std::string> property_failures;

void require(bool cond, const std::string& what) {
    if (!cond && property_failures.size() < 20) property_failures.push_back(what);
}

void check_itemize_properties(const NormalizedDoc& doc, const partition::PartitionResult& pr, const std::string& id) {
    if (!pr.ok()) return;
    const auto& s = pr.split();
    for (int part = 1; part <= 2; ++part) {
        const BlockRange range = part == 1 ? s.part1 : s.part2;
        itemize::ItemizeTrace trace;
        const auto res = itemize::identify_items(range, part, doc, pr.toc, &trace);
        if (!itemize::succeeded(res)) continue;
        const auto& recs = std::get<std::vector<itemize::ItemRecord>>(res);
        std::set<std::string> ids;
        int last_canon = -1;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            const auto& r = recs[i];
            require(ids.insert(r.item_id).second, id + ": duplicate item " + r.item_id);
            const int c = canonical_index(part, r.item_id);
            require(c > last_canon, id + ": items out of canonical order");
            last_canon = c;
            if (i > 0) require(r.title_block > recs[i - 1].title_block, id + ": title blocks not increasing");
            require(r.content_range.begin == r.title_block + 1, id + ": content does not follow title");
            const std::size_t expected_end = i + 1 < recs.size() ? recs[i + 1].title_block : range.end;
            require(r.content_range.end == expected_end, id + ": content ranges do not tile the part");
        }
        for (std::size_t i = 1; i < trace.cursor.size(); ++i)
            require(trace.cursor[i] >= trace.cursor[i - 1], id + ": cursor moved backward");
    }
}

void check_candidates_superset(const NormalizedDoc& doc, const eval::GroundTruth& truth, const std::string& id) {
    const auto cands = candidates::find_candidates(doc, canonical_layout());
    std::set<std::size_t> blocks;
    for (const auto& c : cands) blocks.insert(c.block_index);
    for (const auto& t : truth.items) {
        if (!t.has_keyword) continue;
        require(blocks.count(t.title_block) == 1, id + ": truth title block missing from candidates");
    }
    for (const auto& b : doc.blocks) {
        if (b.is_marker()) continue;
        bool any = false;
        for (const auto& item : canonical_layout()) any = any || testing::oracle_has_item(b.text, item.item_id);
        require(any == (blocks.count(b.index) == 1), id + ": candidate set differs from keyword oracle at block " +
                                                          std::to_string(b.index));
    }
}

bool oracle_validates(const NormalizedDoc& doc, const std::optional<BlockRange>& toc, std::size_t split) {
    const std::regex p1("item\\s*[1-4]", std::regex::icase);
    const std::regex p2("item\\s*[1-6]", std::regex::icase);
    if (split == 0 || split >= doc.size()) return false;
    const std::size_t start = partition::part1_start(doc, toc, split);
    auto has = [&](std::size_t a, std::size_t b, const std::regex& re) {
        for (std::size_t i = a; i < b; ++i) {
            const auto& blk = doc.blocks[i];
            if (blk.kind != BlockKind::TableRow && !blk.is_marker() && std::regex_search(blk.text, re)) return true;
        }
        return false;
    };
    return start < split && has(start, split, p1) && has(split, doc.size(), p2);
}

void check_pillar_precedence(const NormalizedDoc& doc, const partition::PartitionResult& pr, const std::string& id) {
    using P = partition::Pillar;
    const std::optional<partition::SplitPoint> raw[3] = {partition::pillar_hyperlink(doc, pr.toc),
                                                         partition::pillar_regex(doc, pr.toc),
                                                         partition::pillar_page_header(doc, pr.toc)};
    std::optional<int> first_valid;
    for (int k = 0; k < 3 && !first_valid; ++k) {
        if (raw[k] && oracle_validates(doc, pr.toc, raw[k]->block_index)) first_valid = k;
    }
    if (!first_valid) {
        require(!pr.ok(), id + ": split accepted although no pillar validates");
        return;
    }
    require(pr.ok(), id + ": no split although a pillar validates");
    if (!pr.ok()) return;
    const P expected = static_cast<P>(*first_valid);
    require(pr.split().split.pillar == expected, id + ": pillar precedence violated");
    require(pr.split().split.block_index == raw[*first_valid]->block_index, id + ": split block differs from pillar");
    require(pr.trace.size() == static_cast<std::size_t>(*first_valid) + 1, id + ": later pillars consulted");
}

void check_store_round_trip(const pipeline::FilingResult& result, const fs::path& out, const std::string& id) {
    const auto m1 = pipeline::store_result(result, out);
    const fs::path dir = store::filing_dir(out, m1.document_id);
    std::map<std::string, std::string> first;
    for (const auto& it : m1.items) first[it.key] = read_file(dir / it.file);
    const auto m2 = pipeline::store_result(result, out);
    for (const auto& it : m2.items) require(read_file(dir / it.file) == first[it.key], id + ": rewrite not byte-identical");
    const auto back = store::read_manifest(dir);
    require(store::manifest_to_json(back) == store::manifest_to_json(m2), id + ": manifest round trip");
    std::set<std::string> keys;
    for (const auto& it : back.items) keys.insert(it.key);
    require(keys.size() == result.records.size(), id + ": manifest key count");
    for (const auto& r : result.records) {
        const std::string key = store::ItemKey{m1.document_id, r.part, r.item_id}.render();
        require(keys.count(key) == 1, id + ": key missing " + key);
        require(first[key] == store::item_text(result.doc, r.content_range), id + ": stored text differs");
    }
    const auto texts = store::effective_texts(dir);
    require(texts == first, id + ": effective texts differ");
    require(store::parse_json_bundle(read_file(store::export_items(dir, store::ExportFormat::JsonBundle))) == texts,
            id + ": json bundle round trip");
    require(store::parse_csv(read_file(store::export_items(dir, store::ExportFormat::Csv))) == texts,
            id + ": csv round trip");
    require(store::read_plain_dir(store::export_items(dir, store::ExportFormat::PlainDir)) == texts,
            id + ": plain dir round trip");
}

void check_split_determinism() {
    const auto data = pipeline::make_training_set(5, 1000);
    const auto a = classifiers::split_dataset(data, 17);
    const auto b = classifiers::split_dataset(data, 17);
    auto ids = [](const std::vector<classifiers::LabeledExample>& v) {
        std::vector<std::string> out;
        for (const auto& e : v) out.push_back(e.candidate_id.value_or(""));
        return out;
    };
    require(ids(a.train) == ids(b.train) && ids(a.validation) == ids(b.validation) && ids(a.test) == ids(b.test),
            "split not deterministic");
    require(a.train.size() == 800 && a.validation.size() == 100 && a.test.size() == 100, "split sizes");
    std::set<std::string> all;
    for (const auto* part : {&a.train, &a.validation, &a.test})
        for (const auto& id : ids(*part)) all.insert(id);
    require(all.size() == 1000, "split parts overlap or drop examples");
}

Outcome properties() {
    property_failures.clear();
    testing::TempDir out;
    std::size_t checked = 0;
    for (const auto& spec : {eval::SyntheticSpec::clean(31, 40), eval::SyntheticSpec::perturbed(32, 80, 0.3)}) {
        for (std::size_t i = 0; i < spec.n_filings; ++i) {
            const auto f = eval::generate_filing(spec, i);
            const auto doc = testing::normalized(f);
            const auto pr = partition::divide_parts(doc);
            check_itemize_properties(doc, pr, f.filing_id);
            check_candidates_superset(doc, f.truth, f.filing_id);
            check_pillar_precedence(doc, pr, f.filing_id);
            check_store_round_trip(pipeline::process_doc(doc), out.path(), f.filing_id);
            ++checked;
        }
    }
    check_split_determinism();
    std::string detail = std::to_string(checked) + " filings checked";
    for (const auto& f : property_failures) detail += "; " + f;
    return {property_failures.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"precision_from_confusion_counts", precision_from_counts},
        {"coverage_composition", coverage_composition},
        {"clean_corpus_rule_based_exact", clean_corpus},
        {"fallback_recovers_more_never_worse", fallback_ablation},
        {"median_time_per_100kb_filing", throughput},
        {"six_classical_models_held_out", classical_models},
        {"itemize_candidates_partition_store_split_properties", properties},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
