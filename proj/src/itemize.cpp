#include "tenq/itemize.hpp"

#include "tenq/error.hpp"
#include "tenq/text_util.hpp"

namespace tenq::itemize {

const char* to_string(Method m) {
    switch (m) {
        case Method::RuleBased: return "rule_based";
        case Method::ClassifierAssisted: return "classifier_assisted";
        case Method::HumanEdited: return "human_edited";
    }
    return "rule_based";
}

Method method_from_string(std::string_view s) {
    for (auto m : {Method::RuleBased, Method::ClassifierAssisted, Method::HumanEdited}) {
        if (s == to_string(m)) return m;
    }
    throw Error("unknown extraction method: " + std::string(s));
}

const char* to_string(MatchQuality q) {
    switch (q) {
        case MatchQuality::Exact: return "exact";
        case MatchQuality::Fuzzy: return "fuzzy";
        case MatchQuality::None: return "none";
    }
    return "none";
}

nlohmann::json record_to_json(const ItemRecord& r) {
    return {{"filing_id", r.filing_id},
            {"part", r.part},
            {"item_id", r.item_id},
            {"title_block", r.title_block},
            {"content_range", {r.content_range.begin, r.content_range.end}},
            {"method", to_string(r.method)},
            {"title_text", r.title_text}};
}

ItemRecord record_from_json(const nlohmann::json& j) {
    ItemRecord r;
    r.filing_id = j.at("filing_id").get<std::string>();
    r.part = j.at("part").get<int>();
    r.item_id = j.at("item_id").get<std::string>();
    r.title_block = j.at("title_block").get<std::size_t>();
    r.content_range = {j.at("content_range").at(0).get<std::size_t>(), j.at("content_range").at(1).get<std::size_t>()};
    r.method = method_from_string(j.at("method").get<std::string>());
    r.title_text = j.value("title_text", "");
    return r;
}

MatchQuality match_title(const Block& block, const CanonicalItem& expected) {
    if (block.is_marker() || text::utf8_length(block.text) > kMaxTitleChars) return MatchQuality::None;
    if (auto label = patterns::leading_item_label(block.text)) {
        return label->id == expected.item_id ? MatchQuality::Exact : MatchQuality::None;
    }
    if (patterns::matches_distinctive(text::fold_words(block.text), expected)) return MatchQuality::Fuzzy;
    return MatchQuality::None;
}

bool styled_like_title(const Block& block) {
    if (block.bold || block.centered || block.kind == BlockKind::Heading) return true;
    return block.left_spaces > 0 && text::utf8_length(block.text) <= kShortTitleChars;
}

ItemizeResult identify_items(BlockRange part_blocks, int part, const NormalizedDoc& doc,
                             const std::optional<BlockRange>& toc, ItemizeTrace* trace) {
    const auto items = canonical_items(part);
    std::vector<ItemRecord> records;
    std::size_t cursor = 0;
    const std::size_t end = std::min(part_blocks.end, doc.blocks.size());

    for (std::size_t i = part_blocks.begin; i < end && cursor < items.size(); ++i) {
        const Block& b = doc.blocks[i];
        if (b.is_marker() || (toc && toc->contains(i)) || !styled_like_title(b)) continue;

        std::optional<std::size_t> accepted;
        std::size_t fuzzy_hits = 0, fuzzy_at = 0;
        for (std::size_t k = cursor; k < items.size(); ++k) {
            const auto q = match_title(b, items[k]);
            if (q == MatchQuality::Exact) {
                accepted = k;
                break;
            }
            if (q == MatchQuality::Fuzzy) {
                ++fuzzy_hits;
                fuzzy_at = k;
            }
        }
        if (!accepted && fuzzy_hits == 1) accepted = fuzzy_at;
        if (!accepted) continue;

        if (!records.empty()) records.back().content_range.end = i;
        records.push_back({doc.filing_id, part, items[*accepted].item_id, i, {i + 1, end}, Method::RuleBased, b.text});
        cursor = *accepted + 1;
        if (trace) trace->cursor.push_back(cursor);
    }
    if (records.empty()) return ItemizeFailure{};
    return records;
}

}  // namespace tenq::itemize
