#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tenq {

// One row of the SEC's 10-Q layout.
struct CanonicalItem {
    int part = 1;              // 1 or 2
    std::string item_id;       // "1", "1A", ... ("1-A" in the SEC table maps to "1A")
    std::string label;         // as printed in the SEC table, e.g. "Item 1-A."
    std::string official_title;
    // Folded phrases (see text::fold_words) a filer may use in place of the
    // "Item N" prefix. The first entry is the official title's distinctive words.
    std::vector<std::string> distinctive;

    friend bool operator==(const CanonicalItem& a, const CanonicalItem& b) {
        return a.part == b.part && a.item_id == b.item_id;
    }
};

// The 11 canonical items, Part I first, each part in table order.
const std::vector<CanonicalItem>& canonical_layout();
std::vector<CanonicalItem> canonical_items(int part);
const CanonicalItem* find_canonical(int part, std::string_view item_id);
// Index of (part, item_id) within canonical_layout(), or -1.
int canonical_index(int part, std::string_view item_id);

inline constexpr const char* kPart1Title = "Financial Information";
inline constexpr const char* kPart2Title = "Other Information";

namespace patterns {

// Leading "Item <id>" label of a text. id is normalized: digits followed by an
// optional uppercase letter ("1-A", "1(a)", "1a" all become "1A").
struct ItemLabel {
    std::string id;
    int number = 0;
    std::size_t begin = 0;  // byte offset of "Item"
    std::size_t end = 0;    // byte offset just past the id
};

// Parses an item label starting exactly at byte pos.
std::optional<ItemLabel> parse_item_label_at(std::string_view text, std::size_t pos);

// Label at the start of the text (leading whitespace tolerated).
std::optional<ItemLabel> leading_item_label(std::string_view text);

// Every "Item <id>" occurrence whose "Item" is not preceded by a letter or digit.
std::vector<ItemLabel> find_item_labels(std::string_view text);

// First occurrence of "Item <id>" matching the given canonical id anywhere in
// the text, with a word boundary after the id.
std::optional<ItemLabel> find_item(std::string_view text, std::string_view item_id);

// Part heading at the start of the text: "PART II", "Part 2 - Other Information",
// "PART I. FINANCIAL INFORMATION". Returns 1 or 2.
std::optional<int> part_heading(std::string_view text);

// True when the folded text equals or starts (at a word boundary) with one of
// the item's distinctive phrases.
bool matches_distinctive(std::string_view folded_text, const CanonicalItem& item);

// Text with any leading item label stripped, then folded.
std::string folded_without_label(std::string_view text);

// True when the text names a Part II item by title (with or without label).
bool names_part2_item(std::string_view text);

}  // namespace patterns

}  // namespace tenq
