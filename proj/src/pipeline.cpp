#include "tenq/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "tenq/backend.hpp"
#include "tenq/error.hpp"
#include "tenq/layout.hpp"
#include "tenq/metrics.hpp"

namespace tenq::pipeline {

using candidates::Candidate;
using classifiers::Prediction;
using itemize::ItemRecord;
using itemize::Method;

Classifier local_classifier(classifiers::Model model) {
    return [model = std::move(model)](const NormalizedDoc& doc, const std::vector<Candidate>& cands) {
        std::vector<Prediction> out;
        out.reserve(cands.size());
        for (const auto& c : cands) out.push_back(classifiers::predict(model, candidates::extract_features(c, doc)));
        return out;
    };
}

Classifier external_classifier(classifiers::BackendHandle& backend, std::optional<classifiers::Model> fallback,
                               classifiers::ExternalStats* stats) {
    return [&backend, fallback = std::move(fallback), stats](const NormalizedDoc& doc, const std::vector<Candidate>& cands) {
        std::vector<candidates::ContextSnippet> snippets;
        snippets.reserve(cands.size());
        for (const auto& c : cands) snippets.push_back(c.context);
        auto local = [&](std::size_t i) -> Prediction {
            if (!fallback) return {};
            return classifiers::predict(*fallback, candidates::extract_features(cands[i], doc));
        };
        return classifiers::external_classify(backend, snippets, local, stats);
    };
}

bool FilingResult::rule_based_complete() const {
    if (!partition.ok()) return false;
    for (const auto& s : stages) {
        if ((s.stage == "itemize_part1" || s.stage == "itemize_part2") && s.outcome != "ok") return false;
    }
    return true;
}

namespace {

void hook(const Options& o, std::string_view stage) {
    if (o.fault_hook) o.fault_hook(stage);
}

bool is_part2_heading(const Block& b) {
    return !b.is_marker() && patterns::part_heading(b.text) == 2;
}

}  // namespace

std::vector<ItemRecord> fallback_items(const NormalizedDoc& doc, BlockRange region,
                                       const std::vector<CanonicalItem>& targets,
                                       const std::optional<BlockRange>& toc, const Classifier& classifier,
                                       std::size_t window) {
    std::vector<ItemRecord> records;
    if (!classifier || targets.empty()) return records;
    auto cands = candidates::find_candidates(doc, targets, region, window);
    if (toc) {
        std::erase_if(cands, [&](const Candidate& c) { return toc->contains(c.block_index); });
    }
    if (cands.empty()) return records;
    const auto preds = classifier(doc, cands);
    if (preds.size() != cands.size()) throw Error("classifier returned " + std::to_string(preds.size()) +
                                                  " predictions for " + std::to_string(cands.size()) + " candidates");

    std::size_t cursor = 0;
    std::optional<std::size_t> last_block;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!preds[i].label) continue;
        const auto& c = cands[i];
        if (last_block && *last_block == c.block_index) continue;
        const auto it = std::find_if(targets.begin(), targets.end(), [&](const CanonicalItem& t) {
            return t.part == c.part && t.item_id == c.item_id;
        });
        const auto k = static_cast<std::size_t>(it - targets.begin());
        if (it == targets.end() || k < cursor) continue;
        ItemRecord r;
        r.filing_id = doc.filing_id;
        r.part = c.part;
        r.item_id = c.item_id;
        r.title_block = c.block_index;
        r.content_range = {c.block_index + 1, region.end};
        r.method = Method::ClassifierAssisted;
        r.title_text = doc.blocks[c.block_index].text;
        records.push_back(std::move(r));
        cursor = k + 1;
        last_block = c.block_index;
    }

    for (std::size_t j = 0; j < records.size(); ++j) {
        auto& r = records[j];
        if (j + 1 < records.size()) r.content_range.end = records[j + 1].title_block;
        const bool crosses = r.part == 1 && (j + 1 == records.size() || records[j + 1].part == 2);
        const bool mixed = std::any_of(targets.begin(), targets.end(), [](const CanonicalItem& t) { return t.part == 2; });
        if (r.part == 1 && crosses && mixed) {
            for (std::size_t b = r.content_range.end; b > r.content_range.begin; --b) {
                if (is_part2_heading(doc.blocks[b - 1])) {
                    r.content_range.end = b - 1;
                    break;
                }
            }
        }
    }
    return records;
}

FilingResult process_doc(NormalizedDoc doc, const Options& options) {
    FilingResult r;
    r.filing_id = doc.filing_id;
    r.doc = std::move(doc);
    const NormalizedDoc& d = r.doc;
    r.stages.push_back({"normalize", "ok", std::to_string(d.size()) + " blocks"});

    hook(options, "partition");
    const Clock& clock = options.clock ? *options.clock : steady_clock();
    r.partition = partition::divide_parts(d, options.partition_budget, clock);
    const auto& toc = r.partition.toc;

    if (!r.partition.ok()) {
        r.stages.push_back({"partition", "failed", partition::to_string(r.partition.failure().reason)});
        if (options.fallback) {
            hook(options, "fallback");
            r.records = fallback_items(d, d.all(), canonical_layout(), toc, options.fallback, options.context_window);
            r.used_fallback = true;
            const auto detail = std::to_string(r.records.size()) + " records after partition failure";
            r.stages.push_back({"itemize_part1", "fallback", detail});
            r.stages.push_back({"itemize_part2", "fallback", detail});
        } else {
            r.stages.push_back({"itemize_part1", "skipped", "no partition"});
            r.stages.push_back({"itemize_part2", "skipped", "no partition"});
        }
        return r;
    }

    const auto& split = r.partition.split();
    r.stages.push_back({"partition", "ok",
                        std::string(partition::to_string(split.split.pillar)) + " at block " +
                            std::to_string(split.split.block_index)});
    for (int part = 1; part <= 2; ++part) {
        const std::string stage = "itemize_part" + std::to_string(part);
        hook(options, stage);
        const BlockRange range = part == 1 ? split.part1 : split.part2;
        auto result = itemize::identify_items(range, part, d, toc);
        if (itemize::succeeded(result)) {
            auto& recs = std::get<std::vector<ItemRecord>>(result);
            r.stages.push_back({stage, "ok", std::to_string(recs.size()) + " records"});
            r.records.insert(r.records.end(), recs.begin(), recs.end());
        } else if (options.fallback) {
            hook(options, "fallback");
            auto recs = fallback_items(d, range, canonical_items(part), toc, options.fallback, options.context_window);
            r.used_fallback = true;
            r.stages.push_back({stage, "fallback", std::to_string(recs.size()) + " records"});
            r.records.insert(r.records.end(), recs.begin(), recs.end());
        } else {
            r.stages.push_back({stage, "failed", "no items found"});
        }
    }
    return r;
}

FilingResult process_body(std::string_view body, std::string filing_id, const Options& options) {
    hook(options, "normalize");
    const std::string decoded = ingest::decode_body(body);
    const auto format = ingest::classify_format(decoded);
    return process_doc(normalize(decoded, format, std::move(filing_id)), options);
}

FilingResult process_raw(const ingest::RawFiling& raw, const Options& options) {
    hook(options, "ingest");
    const auto docs = ingest::strip_sgml_envelope(raw.bytes);
    const auto& primary = ingest::primary_document(docs);
    auto r = process_body(primary.body, raw.accession_id, options);
    r.stages.insert(r.stages.begin(), {"ingest", "ok", primary.doc_type});
    return r;
}

store::WriteOptions write_options_for(const FilingResult& r) {
    store::WriteOptions w;
    if (r.partition.ok()) {
        w.split_pillar = partition::to_string(r.partition.split().split.pillar);
        w.split_block = r.partition.split().split.block_index;
    }
    w.stages = r.stages;
    return w;
}

store::Manifest store_result(const FilingResult& r, const fs::path& out_dir) {
    return store::write_items(r.doc, r.records, out_dir, write_options_for(r));
}

bool record_correct(const ItemRecord& r, const eval::GroundTruth& truth) {
    return std::any_of(truth.items.begin(), truth.items.end(), [&](const eval::TruthItem& t) {
        return t.part == r.part && t.item_id == r.item_id && t.title_block == r.title_block &&
               t.content_range == r.content_range;
    });
}

FilingScore score_filing(const FilingResult& r, const eval::GroundTruth& truth) {
    FilingScore s;
    s.truth_items = truth.items.size();
    s.rule_complete = r.rule_based_complete();
    std::size_t correct = 0;
    for (const auto& rec : r.records) {
        const bool ok = record_correct(rec, truth);
        correct += ok;
        if (rec.method == Method::ClassifierAssisted) {
            ++s.fallback_records;
            s.fallback_correct += ok;
        } else {
            ++s.rule_records;
            s.rule_correct += ok;
        }
    }
    s.exact = correct == truth.items.size() && r.records.size() == truth.items.size();
    return s;
}

void CoverageReport::add(const FilingScore& s) {
    ++n_filings;
    truth_items += s.truth_items;
    rule_records += s.rule_records;
    rule_correct += s.rule_correct;
    fallback_records += s.fallback_records;
    fallback_correct += s.fallback_correct;
    fallback_filings += !s.rule_complete;
    exact_filings += s.exact;
}

void CoverageReport::finish() {
    const eval::Ratio success{n_filings - fallback_filings, n_filings};
    rule_based_success_rate = success.value();
    fallback_rate = n_filings ? 1.0 - rule_based_success_rate : 0.0;
    rule_based_item_precision = eval::Ratio{rule_correct, rule_records}.value();
    fallback_precision = eval::Ratio{fallback_correct, fallback_records}.value();
    overall = eval::coverage_compose(rule_based_success_rate, rule_based_item_precision, fallback_rate,
                                     fallback_precision);
}

nlohmann::json report_to_json(const CoverageReport& r) {
    auto r4 = [](double x) { return eval::round_to(x, 4); };
    return {{"n_filings", r.n_filings},
            {"truth_items", r.truth_items},
            {"exact_filings", r.exact_filings},
            {"rule_based", {{"records", r.rule_records}, {"correct", r.rule_correct}}},
            {"fallback", {{"filings", r.fallback_filings}, {"records", r.fallback_records}, {"correct", r.fallback_correct}}},
            {"rule_based_success_rate", r4(r.rule_based_success_rate)},
            {"rule_based_item_precision", r4(r.rule_based_item_precision)},
            {"fallback_rate", r4(r.fallback_rate)},
            {"fallback_precision", r4(r.fallback_precision)},
            {"overall", r4(r.overall)}};
}

std::vector<classifiers::LabeledExample> make_labeled_examples(const NormalizedDoc& doc,
                                                                const eval::GroundTruth& truth) {
    std::vector<classifiers::LabeledExample> out;
    const std::size_t split = std::min(truth.split_block, doc.size());
    const BlockRange ranges[2] = {{0, split}, {split, doc.size()}};
    for (int part = 1; part <= 2; ++part) {
        for (const auto& c : candidates::find_candidates(doc, canonical_items(part), ranges[part - 1], 0)) {
            if (truth.toc && truth.toc->contains(c.block_index)) continue;
            classifiers::LabeledExample e;
            e.features = candidates::extract_features(c, doc);
            e.label = std::any_of(truth.items.begin(), truth.items.end(), [&](const eval::TruthItem& t) {
                return t.part == c.part && t.item_id == c.item_id && t.title_block == c.block_index;
            });
            e.source_filing = truth.filing_id;
            e.candidate_id = truth.filing_id + ":" + std::to_string(c.block_index) + ":" + std::to_string(part) + ":" +
                             c.item_id;
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<classifiers::LabeledExample> make_training_set(std::uint64_t seed, std::size_t n, double positive_share) {
    if (!(positive_share > 0.0 && positive_share < 1.0)) throw ConfigError("positive share must lie in (0, 1)");
    const auto want_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * positive_share));
    const std::size_t want_neg = n - want_pos;

    auto spec = eval::SyntheticSpec::perturbed(seed, 0, 0.2);
    spec.in_paragraph_references = 0.75;
    std::vector<classifiers::LabeledExample> pos, neg;
    // Collect a surplus so the sample does not come from the first few filings only.
    for (std::size_t i = 0; pos.size() < 2 * want_pos || neg.size() < 2 * want_neg; ++i) {
        if (i > 20000) throw DegenerateData("synthetic corpus cannot supply the requested class balance");
        const auto f = eval::generate_filing(spec, i);
        const auto docs = ingest::strip_sgml_envelope(f.raw);
        const auto body = ingest::decode_body(ingest::primary_document(docs).body);
        const auto doc = normalize(body, ingest::classify_format(body), f.filing_id);
        for (auto& e : make_labeled_examples(doc, f.truth)) (e.label ? pos : neg).push_back(std::move(e));
    }
    eval::Rng rng(seed ^ 0x5A3D1E5ULL);
    auto sample = [&](std::vector<classifiers::LabeledExample>& v, std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) std::swap(v[i], v[i + rng.below(v.size() - i)]);
        v.resize(k);
    };
    sample(pos, want_pos);
    sample(neg, want_neg);
    std::vector<classifiers::LabeledExample> out = std::move(pos);
    out.insert(out.end(), neg.begin(), neg.end());
    for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
    return out;
}

TimingSummary summarize_timings(std::vector<double> seconds, double mean_bytes) {
    TimingSummary t;
    t.count = seconds.size();
    t.mean_bytes = mean_bytes;
    if (seconds.empty()) return t;
    std::sort(seconds.begin(), seconds.end());
    const std::size_t n = seconds.size();
    t.median_s = n % 2 ? seconds[n / 2] : (seconds[n / 2 - 1] + seconds[n / 2]) / 2.0;
    t.p95_s = seconds[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n))) - 1)];
    t.max_s = seconds.back();
    return t;
}

CorpusRun run_corpus(const std::vector<eval::SyntheticFiling>& filings, const Options& options,
                     const std::optional<fs::path>& out_dir, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, filings.size())));
    std::vector<FilingScore> scores(filings.size());
    std::vector<double> seconds(filings.size());
    std::vector<std::exception_ptr> errors(filings.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < filings.size(); i = next++) {
            try {
                const auto& f = filings[i];
                ingest::RawFiling raw;
                raw.accession_id = f.filing_id;
                raw.bytes = f.raw;
                const auto t0 = std::chrono::steady_clock::now();
                auto result = process_raw(raw, options);
                if (out_dir) store_result(result, *out_dir);
                const auto t1 = std::chrono::steady_clock::now();
                seconds[i] = std::chrono::duration<double>(t1 - t0).count();
                scores[i] = score_filing(result, f.truth);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    CorpusRun run;
    double bytes = 0;
    for (std::size_t i = 0; i < filings.size(); ++i) {
        run.report.add(scores[i]);
        bytes += static_cast<double>(filings[i].raw.size());
    }
    run.report.finish();
    run.timing = summarize_timings(seconds, filings.empty() ? 0 : bytes / static_cast<double>(filings.size()));
    run.scores = std::move(scores);
    return run;
}

}  // namespace tenq::pipeline
