#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tenq/backend.hpp"
#include "tenq/classifiers.hpp"
#include "tenq/pipeline.hpp"

namespace tenq::batch {

namespace fs = std::filesystem;

enum class FallbackMode { Off, Classical, External };

const char* to_string(FallbackMode m);
FallbackMode fallback_from_string(std::string_view s);  // throws ConfigError

inline constexpr const char* kCacheDirEnv = "TENQ_CACHE_DIR";
inline constexpr const char* kDefaultCacheDir = ".tenq-cache";
inline constexpr const char* kRunReportFile = "run_report.json";
inline constexpr std::size_t kSyntheticTrainingExamples = 1000;

struct RunConfig {
    // Accession list file, directory of filings, or a single filing file.
    fs::path input;
    fs::path cache_dir;
    fs::path out_dir;
    FallbackMode fallback = FallbackMode::Off;
    classifiers::ModelKind kind = classifiers::ModelKind::Logistic;
    // Classical: trained model to load. Without one a model of `kind` is trained on synthetic examples.
    std::optional<fs::path> model_file;
    std::string backend_command;
    std::chrono::milliseconds budget = std::chrono::duration_cast<std::chrono::milliseconds>(partition::kDefaultBudget);
    unsigned workers = 1;
    std::uint64_t seed = 1;
    // Test hook, called before each stage of each filing.
    std::function<void(const std::string& input, std::string_view stage)> fault_hook;
};

// Cache dir from the environment when the config leaves it empty.
fs::path effective_cache_dir(const RunConfig& c);

// Throws ConfigError for unusable configurations. Touches nothing on disk.
void validate(const RunConfig& c);

struct InputRef {
    std::string label;  // path or accession as given
    std::optional<fs::path> path;
    std::optional<std::string> accession;
    std::string document_id;
    std::optional<fs::path> truth_path;
};

std::vector<InputRef> resolve_inputs(const RunConfig& c);

struct FilingOutcome {
    std::string input;
    std::string filing_id;
    std::string document_id;
    bool ok = false;
    std::string error;
    std::size_t records = 0;
    bool used_fallback = false;
    std::vector<store::StageOutcome> stages;
};

struct BatchSummary {
    std::vector<FilingOutcome> filings;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::optional<pipeline::CoverageReport> coverage;  // when every input has ground truth
    pipeline::TimingSummary timing;

    int exit_code() const { return succeeded > 0 ? 0 : 2; }
};

nlohmann::json summary_to_json(const BatchSummary& s);

// Builds the fallback classifier for a config. `backend` receives the spawned process when external.
pipeline::Classifier make_fallback(const RunConfig& c, std::unique_ptr<classifiers::BackendHandle>& backend);

// Itemizes every input, writes store output plus run_report.json under out_dir.
// Per-filing failures are recorded; only configuration problems throw.
BatchSummary run_itemize(const RunConfig& c);

// Raw filings plus ground truth from a generated corpus directory.
std::vector<eval::SyntheticFiling> load_corpus(const fs::path& dir);

}  // namespace tenq::batch
