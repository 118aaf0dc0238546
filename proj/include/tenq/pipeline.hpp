#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tenq/backend.hpp"
#include "tenq/candidates.hpp"
#include "tenq/classifiers.hpp"
#include "tenq/clock.hpp"
#include "tenq/docmodel.hpp"
#include "tenq/ingest.hpp"
#include "tenq/itemize.hpp"
#include "tenq/partition.hpp"
#include "tenq/store.hpp"
#include "tenq/synthetic.hpp"

namespace tenq::pipeline {

namespace fs = std::filesystem;

// Scores candidates in one call so external backends can stream them.
using Classifier = std::function<std::vector<classifiers::Prediction>(const NormalizedDoc&,
                                                                      const std::vector<candidates::Candidate>&)>;

Classifier local_classifier(classifiers::Model model);
// Backend answers first; snippets it cannot answer go to `fallback` (or are rejected without one).
Classifier external_classifier(classifiers::BackendHandle& backend, std::optional<classifiers::Model> fallback,
                               classifiers::ExternalStats* stats = nullptr);

struct Options {
    std::chrono::nanoseconds partition_budget = partition::kDefaultBudget;
    const Clock* clock = nullptr;  // steady clock when null
    // Consulted only where rule-based itemization produced nothing.
    Classifier fallback;
    std::size_t context_window = candidates::kDefaultWindow;
    // Called with each stage name before it runs; tests throw from here.
    std::function<void(std::string_view)> fault_hook;
};

struct FilingResult {
    std::string filing_id;
    NormalizedDoc doc;
    partition::PartitionResult partition;
    std::vector<itemize::ItemRecord> records;
    std::vector<store::StageOutcome> stages;
    bool used_fallback = false;

    bool rule_based_complete() const;  // partition and both parts itemized without fallback
};

// Body already extracted from any envelope.
FilingResult process_body(std::string_view body, std::string filing_id, const Options& options = {});
// Full submission text: envelope stripped, primary document decoded.
FilingResult process_raw(const ingest::RawFiling& raw, const Options& options = {});
FilingResult process_doc(NormalizedDoc doc, const Options& options = {});

// Classifier-assisted records for a region: candidates for `targets` outside the TOC, accepted in canonical order.
// Records spanning a part boundary end at the last Part II heading before the next title.
std::vector<itemize::ItemRecord> fallback_items(const NormalizedDoc& doc, BlockRange region,
                                                const std::vector<CanonicalItem>& targets,
                                                const std::optional<BlockRange>& toc, const Classifier& classifier,
                                                std::size_t window = candidates::kDefaultWindow);

store::WriteOptions write_options_for(const FilingResult& r);
store::Manifest store_result(const FilingResult& r, const fs::path& out_dir);

// ---- evaluation against synthetic ground truth ----

bool record_correct(const itemize::ItemRecord& r, const eval::GroundTruth& truth);

struct FilingScore {
    std::size_t truth_items = 0;
    std::size_t rule_records = 0;
    std::size_t rule_correct = 0;
    std::size_t fallback_records = 0;
    std::size_t fallback_correct = 0;
    bool rule_complete = false;
    bool exact = false;  // every truth item recovered, nothing extra
};

FilingScore score_filing(const FilingResult& r, const eval::GroundTruth& truth);

struct CoverageReport {
    std::size_t n_filings = 0;
    std::size_t truth_items = 0;
    std::size_t rule_records = 0, rule_correct = 0;
    std::size_t fallback_records = 0, fallback_correct = 0;
    std::size_t fallback_filings = 0;
    std::size_t exact_filings = 0;
    double rule_based_success_rate = 0;
    double rule_based_item_precision = 0;
    double fallback_rate = 0;
    double fallback_precision = 0;
    double overall = 0;

    void add(const FilingScore& s);
    void finish();
};

nlohmann::json report_to_json(const CoverageReport& r);

// ---- labeled examples ----

// One example per candidate outside the truth TOC; targets follow the truth part split.
// label = the candidate block is that item's truth title.
std::vector<classifiers::LabeledExample> make_labeled_examples(const NormalizedDoc& doc,
                                                                const eval::GroundTruth& truth);

inline constexpr double kDefaultPositiveShare = 0.371;

// Exactly n examples, round(n * positive_share) of them positive, drawn from perturbed synthetic filings.
std::vector<classifiers::LabeledExample> make_training_set(std::uint64_t seed, std::size_t n,
                                                           double positive_share = kDefaultPositiveShare);

// ---- batch runs ----

struct TimingSummary {
    std::size_t count = 0;
    double median_s = 0;
    double p95_s = 0;
    double max_s = 0;
    double mean_bytes = 0;
};

TimingSummary summarize_timings(std::vector<double> seconds, double mean_bytes = 0);

struct CorpusRun {
    CoverageReport report;
    TimingSummary timing;  // normalize through store, per filing
    std::vector<FilingScore> scores;
};

// Runs every filing of a generated corpus through the pipeline (and the store when out_dir is set).
CorpusRun run_corpus(const std::vector<eval::SyntheticFiling>& filings, const Options& options,
                     const std::optional<fs::path>& out_dir = std::nullopt, unsigned threads = 0);

}  // namespace tenq::pipeline
