#include "tenq/layout.hpp"

#include <cctype>

#include "tenq/text_util.hpp"

namespace tenq {

const std::vector<CanonicalItem>& canonical_layout() {
    static const std::vector<CanonicalItem> layout = {
        {1, "1", "Item 1.", "Financial Statements",
         {"financial statements", "condensed consolidated financial statements", "consolidated financial statements"}},
        {1, "2", "Item 2.", "MD&A Condition and Results of Operations",
         {"managements discussion and analysis", "md a"}},
        {1, "3", "Item 3.", "Quantitative and Qualitative Disclosures About Market Risk",
         {"quantitative and qualitative disclosures", "quantitative and qualitative disclosure"}},
        {1, "4", "Item 4.", "Controls and Procedures", {"controls and procedures"}},
        {2, "1", "Item 1.", "Legal Proceedings", {"legal proceedings"}},
        {2, "1A", "Item 1-A.", "Risk Factors", {"risk factors"}},
        {2, "2", "Item 2.", "Unregistered Sales of Equity Securities and Use of Proceeds",
         {"unregistered sales of equity securities", "changes in securities"}},
        {2, "3", "Item 3.", "Defaults Upon Senior Securities", {"defaults upon senior securities"}},
        {2, "4", "Item 4.", "Mine Safety Disclosures",
         {"mine safety disclosures", "submission of matters to a vote of security holders"}},
        {2, "5", "Item 5.", "Other Information", {"other information"}},
        {2, "6", "Item 6.", "Exhibits", {"exhibits"}},
    };
    return layout;
}

std::vector<CanonicalItem> canonical_items(int part) {
    std::vector<CanonicalItem> out;
    for (const auto& item : canonical_layout()) {
        if (item.part == part) out.push_back(item);
    }
    return out;
}

const CanonicalItem* find_canonical(int part, std::string_view item_id) {
    for (const auto& item : canonical_layout()) {
        if (item.part == part && item.item_id == item_id) return &item;
    }
    return nullptr;
}

int canonical_index(int part, std::string_view item_id) {
    const auto& layout = canonical_layout();
    for (std::size_t k = 0; k < layout.size(); ++k) {
        if (layout[k].part == part && layout[k].item_id == item_id) return static_cast<int>(k);
    }
    return -1;
}

namespace patterns {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Skips ASCII spaces and UTF-8 NBSP.
std::size_t skip_spaces(std::string_view t, std::size_t j) {
    while (j < t.size()) {
        if (t[j] == ' ' || t[j] == '\t') {
            ++j;
        } else if (j + 1 < t.size() && static_cast<unsigned char>(t[j]) == 0xC2 &&
                   static_cast<unsigned char>(t[j + 1]) == 0xA0) {
            j += 2;
        } else {
            break;
        }
    }
    return j;
}

bool boundary_at(std::string_view t, std::size_t j) { return j >= t.size() || !is_alnum(t[j]); }

// Dash variants between number and letter: '-', en dash, em dash.
std::size_t skip_dash(std::string_view t, std::size_t j) {
    if (j < t.size() && t[j] == '-') return j + 1;
    if (j + 2 < t.size() && static_cast<unsigned char>(t[j]) == 0xE2 && static_cast<unsigned char>(t[j + 1]) == 0x80 &&
        (static_cast<unsigned char>(t[j + 2]) == 0x93 || static_cast<unsigned char>(t[j + 2]) == 0x94))
        return j + 3;
    return j;
}

}  // namespace

std::optional<ItemLabel> parse_item_label_at(std::string_view text, std::size_t pos) {
    if (pos >= text.size() || !text::istarts_with(text.substr(pos), "item")) return std::nullopt;
    std::size_t j = skip_spaces(text, pos + 4);
    std::size_t digits_begin = j;
    while (j < text.size() && is_digit(text[j]) && j - digits_begin < 2) ++j;
    if (j == digits_begin || (j < text.size() && is_digit(text[j]))) return std::nullopt;

    ItemLabel label;
    label.begin = pos;
    label.number = std::stoi(std::string(text.substr(digits_begin, j - digits_begin)));
    label.id = std::string(text.substr(digits_begin, j - digits_begin));
    if (label.number <= 0) return std::nullopt;

    auto letter_ok = [&](std::size_t k) {
        return k < text.size() && std::isalpha(static_cast<unsigned char>(text[k])) && boundary_at(text, k + 1);
    };
    if (letter_ok(j)) {
        label.id.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text[j]))));
        j += 1;
    } else if (std::size_t d = skip_dash(text, j); d != j && letter_ok(d)) {
        label.id.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text[d]))));
        j = d + 1;
    } else if (j + 2 < text.size() && text[j] == '(' && std::isalpha(static_cast<unsigned char>(text[j + 1])) &&
               text[j + 2] == ')') {
        label.id.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text[j + 1]))));
        j += 3;
    } else if (!boundary_at(text, j)) {
        return std::nullopt;
    }
    label.end = j;
    return label;
}

std::optional<ItemLabel> leading_item_label(std::string_view text) {
    std::size_t j = skip_spaces(text, 0);
    return parse_item_label_at(text, j);
}

std::vector<ItemLabel> find_item_labels(std::string_view text) {
    std::vector<ItemLabel> out;
    std::size_t from = 0;
    while (true) {
        std::size_t at = text::ifind(text, "item", from);
        if (at == std::string_view::npos) break;
        from = at + 4;
        if (at > 0 && is_alnum(text[at - 1])) continue;
        if (auto label = parse_item_label_at(text, at)) {
            from = label->end;
            out.push_back(std::move(*label));
        }
    }
    return out;
}

std::optional<ItemLabel> find_item(std::string_view text, std::string_view item_id) {
    for (auto& label : find_item_labels(text)) {
        if (label.id == item_id) return label;
    }
    return std::nullopt;
}

std::optional<int> part_heading(std::string_view text) {
    std::string_view t = text::trim(text);
    if (text::utf8_length(t) > 120 || !text::istarts_with(t, "part")) return std::nullopt;
    std::size_t j = 4;
    while (j < t.size() && (t[j] == ' ' || t[j] == '\t' || t[j] == '.' || t[j] == '-' || t[j] == ':')) ++j;
    j = skip_spaces(t, j);
    auto lower = [&](std::size_t k) {
        return k < t.size() ? static_cast<char>(std::tolower(static_cast<unsigned char>(t[k]))) : '\0';
    };
    if (lower(j) == 'i' && lower(j + 1) == 'i' && boundary_at(t, j + 2)) return 2;
    if (lower(j) == '2' && boundary_at(t, j + 1)) return 2;
    if (lower(j) == 'i' && boundary_at(t, j + 1)) return 1;
    if (lower(j) == '1' && boundary_at(t, j + 1)) return 1;
    return std::nullopt;
}

bool matches_distinctive(std::string_view folded_text, const CanonicalItem& item) {
    for (const auto& phrase : item.distinctive) {
        if (folded_text.size() < phrase.size() || folded_text.compare(0, phrase.size(), phrase) != 0) continue;
        if (folded_text.size() == phrase.size() || folded_text[phrase.size()] == ' ') return true;
    }
    return false;
}

std::string folded_without_label(std::string_view text) {
    if (auto label = leading_item_label(text)) return text::fold_words(text.substr(label->end));
    return text::fold_words(text);
}

bool names_part2_item(std::string_view text) {
    if (text::utf8_length(text) > 120) return false;
    auto folded = folded_without_label(text);
    for (const auto& item : canonical_layout()) {
        if (item.part == 2 && matches_distinctive(folded, item)) return true;
    }
    return false;
}

}  // namespace patterns

}  // namespace tenq
