#include "tenq/candidates.hpp"

#include <algorithm>

#include "tenq/text_util.hpp"

namespace tenq::candidates {

std::array<double, kFeatureCount> FeatureVector::values() const {
    return {static_cast<double>(f_bold), static_cast<double>(f_centered), static_cast<double>(f_left_spaces),
            static_cast<double>(f_right_spaces), static_cast<double>(f_char_count)};
}

FeatureVector FeatureVector::from_values(const std::array<double, kFeatureCount>& v) {
    auto count = [](double x) { return x > 0 ? static_cast<std::size_t>(x + 0.5) : std::size_t{0}; };
    return {v[0] >= 0.5 ? 1 : 0, v[1] >= 0.5 ? 1 : 0, count(v[2]), count(v[3]), count(v[4])};
}

std::vector<Candidate> find_candidates(const NormalizedDoc& doc, const std::vector<CanonicalItem>& targets,
                                       std::optional<BlockRange> range, std::size_t window) {
    const BlockRange r = range.value_or(doc.all());
    std::vector<Candidate> out;
    for (std::size_t i = r.begin; i < r.end && i < doc.blocks.size(); ++i) {
        const Block& b = doc.blocks[i];
        if (b.is_marker() || text::ifind(b.text, "item") == std::string::npos) continue;
        const auto labels = patterns::find_item_labels(b.text);
        for (const auto& target : targets) {
            auto hit = std::find_if(labels.begin(), labels.end(), [&](const auto& l) { return l.id == target.item_id; });
            if (hit == labels.end()) continue;
            Candidate c;
            c.block_index = i;
            c.part = target.part;
            c.item_id = target.item_id;
            c.matched_text = b.text.substr(hit->begin);
            c.context = extract_context(c, doc, window);
            out.push_back(std::move(c));
        }
    }
    return out;
}

FeatureVector extract_features(const Candidate& c, const NormalizedDoc& doc) {
    const Block& b = doc.blocks.at(c.block_index);
    FeatureVector f;
    f.f_bold = b.bold ? 1 : 0;
    f.f_centered = b.centered ? 1 : 0;
    f.f_left_spaces = b.left_spaces;
    f.f_right_spaces = b.right_spaces;
    f.f_char_count = text::utf8_length(c.matched_text);
    return f;
}

ContextSnippet extract_context(const Candidate& c, const NormalizedDoc& doc, std::size_t w) {
    ContextSnippet s;
    const std::size_t first = c.block_index >= w ? c.block_index - w : 0;
    const std::size_t last = std::min(doc.blocks.size(), c.block_index + w + 1);
    s.blocks.assign(doc.blocks.begin() + static_cast<std::ptrdiff_t>(first),
                    doc.blocks.begin() + static_cast<std::ptrdiff_t>(last));
    s.candidate_offset = c.block_index - first;
    return s;
}

nlohmann::json snippet_to_json(const ContextSnippet& s) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : s.blocks) blocks.push_back(block_to_json(b));
    return {{"candidate_offset", s.candidate_offset}, {"blocks", std::move(blocks)}};
}

ContextSnippet snippet_from_json(const nlohmann::json& j) {
    ContextSnippet s;
    s.candidate_offset = j.at("candidate_offset").get<std::size_t>();
    for (const auto& b : j.at("blocks")) s.blocks.push_back(block_from_json(b));
    return s;
}

nlohmann::json features_to_json(const FeatureVector& f) {
    return nlohmann::json::array({f.f_bold, f.f_centered, f.f_left_spaces, f.f_right_spaces, f.f_char_count});
}

FeatureVector features_from_json(const nlohmann::json& j) {
    FeatureVector f;
    f.f_bold = j.at(0).get<int>();
    f.f_centered = j.at(1).get<int>();
    f.f_left_spaces = j.at(2).get<std::size_t>();
    f.f_right_spaces = j.at(3).get<std::size_t>();
    f.f_char_count = j.at(4).get<std::size_t>();
    return f;
}

}  // namespace tenq::candidates
