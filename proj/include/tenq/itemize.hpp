#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tenq/docmodel.hpp"
#include "tenq/layout.hpp"

namespace tenq::itemize {

enum class Method { RuleBased, ClassifierAssisted, HumanEdited };

const char* to_string(Method m);
Method method_from_string(std::string_view s);

struct ItemRecord {
    std::string filing_id;
    int part = 1;
    std::string item_id;
    std::size_t title_block = 0;
    BlockRange content_range;  // title_block + 1 up to the next title or the part end
    Method method = Method::RuleBased;
    std::string title_text;

    friend bool operator==(const ItemRecord&, const ItemRecord&) = default;
};

nlohmann::json record_to_json(const ItemRecord& r);
ItemRecord record_from_json(const nlohmann::json& j);

struct ItemizeFailure {
    enum class Reason { NoItemsFound };
    Reason reason = Reason::NoItemsFound;
};

enum class MatchQuality { None, Fuzzy, Exact };

const char* to_string(MatchQuality q);

inline constexpr std::size_t kMaxTitleChars = 120;
inline constexpr std::size_t kShortTitleChars = 80;

MatchQuality match_title(const Block& block, const CanonicalItem& expected);

// Bold, centered, a heading, or indented short text.
bool styled_like_title(const Block& block);

// Canonical cursor position after each accepted title (index into the part's
// canonical items).
struct ItemizeTrace {
    std::vector<std::size_t> cursor;
};

using ItemizeResult = std::variant<std::vector<ItemRecord>, ItemizeFailure>;

ItemizeResult identify_items(BlockRange part_blocks, int part, const NormalizedDoc& doc,
                             const std::optional<BlockRange>& toc = std::nullopt, ItemizeTrace* trace = nullptr);

inline bool succeeded(const ItemizeResult& r) { return std::holds_alternative<std::vector<ItemRecord>>(r); }

}  // namespace tenq::itemize
