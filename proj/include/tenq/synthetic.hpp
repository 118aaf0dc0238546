#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tenq/docmodel.hpp"

namespace tenq::eval {

namespace fs = std::filesystem;

// Small deterministic generator (splitmix64) so corpora are identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    // Uniform in [0, n); n > 0.
    std::size_t below(std::size_t n);
    std::size_t between(std::size_t lo, std::size_t hi);  // inclusive
    double uniform();                                     // [0, 1)
    bool chance(double p);
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::uint64_t state_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

struct SyntheticSpec {
    std::uint64_t seed = 1;
    std::size_t n_filings = 10;
    double omit_toc = 0;
    double dangling_anchors = 0;
    double reworded_titles = 0;
    double in_paragraph_references = 0;
    double items_omitted = 0;
    double plain_text = 0;
    double unstyled_titles = 0;
    // Pad filings with extra MD&A paragraphs up to roughly this many body bytes (0 = natural size).
    std::size_t target_bytes = 0;

    static SyntheticSpec clean(std::uint64_t seed, std::size_t n);
    // Every perturbation at probability p.
    static SyntheticSpec perturbed(std::uint64_t seed, std::size_t n, double p);

    void validate() const;  // throws ConfigError
};

nlohmann::json spec_to_json(const SyntheticSpec& s);
SyntheticSpec spec_from_json(const nlohmann::json& j);

struct TruthItem {
    int part = 1;
    std::string item_id;
    std::size_t title_block = 0;
    BlockRange content_range;
    std::string title_text;
    bool has_keyword = true;  // title carries an "Item N" label
};

// A block containing an "Item N" keyword, with whether it is a genuine title.
struct KeywordBlock {
    std::size_t block = 0;
    int part = 1;  // part the block sits in (0 = before Part I)
    bool in_toc = false;
    bool is_title = false;
};

struct GroundTruth {
    std::string filing_id;
    FilingFormat format = FilingFormat::Html;
    std::size_t block_count = 0;
    std::size_t part1_start = 0;
    std::size_t split_block = 0;
    std::optional<BlockRange> toc;
    std::vector<TruthItem> items;
    std::vector<KeywordBlock> keyword_blocks;
    std::vector<std::string> perturbations;

    bool has(std::string_view perturbation) const;
};

nlohmann::json truth_to_json(const GroundTruth& t);
GroundTruth truth_from_json(const nlohmann::json& j);

struct SyntheticFiling {
    std::string filing_id;  // 18 digits
    std::string raw;        // full EDGAR submission text
    GroundTruth truth;
};

SyntheticFiling generate_filing(const SyntheticSpec& spec, std::size_t index);

struct CorpusEntry {
    std::string filing_id;
    fs::path raw_path;
    fs::path truth_path;
};

// Writes {id}.txt and {id}.truth.json per filing plus corpus.json.
std::vector<CorpusEntry> generate_corpus(const SyntheticSpec& spec, const fs::path& out_dir);
// Raw filings under dir (any *.txt, *.htm, *.html), sorted by name, with truth paths when present.
std::vector<CorpusEntry> list_corpus(const fs::path& dir);
GroundTruth read_truth(const fs::path& path);

}  // namespace tenq::eval
