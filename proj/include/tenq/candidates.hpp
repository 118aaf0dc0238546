#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tenq/docmodel.hpp"
#include "tenq/layout.hpp"

namespace tenq::candidates {

inline constexpr std::size_t kDefaultWindow = 2;
inline constexpr std::size_t kFeatureCount = 5;

struct FeatureVector {
    int f_bold = 0;
    int f_centered = 0;
    std::size_t f_left_spaces = 0;
    std::size_t f_right_spaces = 0;
    std::size_t f_char_count = 0;

    std::array<double, kFeatureCount> values() const;
    static FeatureVector from_values(const std::array<double, kFeatureCount>& v);
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct ContextSnippet {
    std::vector<Block> blocks;
    std::size_t candidate_offset = 0;
};

struct Candidate {
    std::size_t block_index = 0;
    int part = 1;
    std::string item_id;
    std::string matched_text;  // from "Item" to the end of the block text
    ContextSnippet context;
};

// Every block (inside `range` when given) containing "Item <id>" for any target.
// No style gate. Sorted by block index, then target order.
std::vector<Candidate> find_candidates(const NormalizedDoc& doc, const std::vector<CanonicalItem>& targets,
                                       std::optional<BlockRange> range = std::nullopt,
                                       std::size_t window = kDefaultWindow);

FeatureVector extract_features(const Candidate& c, const NormalizedDoc& doc);
ContextSnippet extract_context(const Candidate& c, const NormalizedDoc& doc, std::size_t w);

nlohmann::json snippet_to_json(const ContextSnippet& s);
ContextSnippet snippet_from_json(const nlohmann::json& j);

nlohmann::json features_to_json(const FeatureVector& f);
FeatureVector features_from_json(const nlohmann::json& j);

}  // namespace tenq::candidates
