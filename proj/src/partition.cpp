#include "tenq/partition.hpp"

#include <algorithm>

#include "tenq/layout.hpp"
#include "tenq/text_util.hpp"

namespace tenq::partition {

const char* to_string(Pillar p) {
    switch (p) {
        case Pillar::Hyperlink: return "hyperlink";
        case Pillar::Regex: return "regex";
        case Pillar::PageHeader: return "page_header";
    }
    return "?";
}

const char* to_string(PartitionFailure::Reason r) {
    return r == PartitionFailure::Reason::Timeout ? "timeout" : "no_split";
}

namespace {

const char* to_string(PillarAttempt::Outcome o) {
    switch (o) {
        case PillarAttempt::Outcome::NotFound: return "not_found";
        case PillarAttempt::Outcome::Rejected: return "rejected";
        case PillarAttempt::Outcome::Accepted: return "accepted";
        case PillarAttempt::Outcome::Skipped: return "skipped";
    }
    return "?";
}

bool in_toc(const std::optional<BlockRange>& toc, std::size_t i) { return toc && toc->contains(i); }

bool styled_as_heading(const Block& b) { return b.bold || b.centered || b.kind == BlockKind::Heading; }

bool expired(const Deadline* d) { return d && d->expired(); }

std::optional<BlockRange> link_toc(const NormalizedDoc& doc) {
    std::vector<std::size_t> links;
    for (const auto& b : doc.blocks) {
        if (b.href) links.push_back(b.index);
    }
    if (links.size() < kTocMinLinks) return std::nullopt;

    std::size_t best_start = 0, best_count = 0;
    for (std::size_t s = 0; s < links.size(); ++s) {
        std::size_t e = s;
        while (e < links.size() && links[e] < links[s] + kTocWindow) ++e;
        if (e - s > best_count) {
            best_count = e - s;
            best_start = s;
        }
    }
    if (best_count < kTocMinLinks) return std::nullopt;
    std::size_t last = best_start + best_count - 1;
    // Long tables of contents run past one window; follow tightly packed links.
    while (last + 1 < links.size() && links[last + 1] <= links[last] + 3) ++last;
    return BlockRange{links[best_start], links[last] + 1};
}

std::optional<BlockRange> keyword_toc(const NormalizedDoc& doc) {
    std::vector<std::size_t> titles;
    const std::size_t horizon = doc.blocks.size() / 2 + 1;
    for (const auto& b : doc.blocks) {
        if (is_title_like(b)) titles.push_back(b.index);
    }
    std::size_t k = 0;
    while (k < titles.size() && titles[k] < horizon) {
        std::size_t e = k + 1;
        while (e < titles.size() && titles[e] - titles[e - 1] <= 3) ++e;
        // Item numbering inside the run; a TOC lists Part I items then restarts for Part II.
        // A TOC names each part once and restarts numbering once, so the run ends before
        // a repeated part heading or a second restart.
        std::vector<int> numbers;
        bool parts_seen[3] = {false, false, false};
        int restarts = 0;
        for (std::size_t t = k; t < e; ++t) {
            const std::string& text = doc.blocks[titles[t]].text;
            if (auto part = patterns::part_heading(text)) {
                if (parts_seen[*part]) {
                    e = t;
                    break;
                }
                parts_seen[*part] = true;
            } else if (auto label = patterns::leading_item_label(text)) {
                if (!numbers.empty() && label->number < numbers.back() && ++restarts > 1) {
                    e = t;
                    break;
                }
                numbers.push_back(label->number);
            }
        }
        for (std::size_t r = 3; r + 3 <= numbers.size(); ++r) {
            if (numbers[r] <= numbers[r - 1]) return BlockRange{titles[k], titles[e - 1] + 1};
        }
        k = e;
    }
    return std::nullopt;
}

bool has_item_keyword(const NormalizedDoc& doc, BlockRange range, int max_number, const Deadline* deadline) {
    for (std::size_t i = range.begin; i < range.end; ++i) {
        if (expired(deadline)) return false;
        const Block& b = doc.blocks[i];
        if (b.kind == BlockKind::TableRow || b.is_marker()) continue;
        if (text::ifind(b.text, "item") == std::string_view::npos) continue;
        for (const auto& label : patterns::find_item_labels(b.text)) {
            if (label.number >= 1 && label.number <= max_number) return true;
        }
    }
    return false;
}

}  // namespace

bool is_title_like(const Block& b) {
    if (b.is_marker() || b.text.empty() || text::utf8_length(b.text) > 120) return false;
    return patterns::part_heading(b.text).has_value() || patterns::leading_item_label(b.text).has_value();
}

std::optional<BlockRange> find_toc_region(const NormalizedDoc& doc) {
    if (auto r = link_toc(doc)) return r;
    return keyword_toc(doc);
}

std::optional<SplitPoint> pillar_hyperlink(const NormalizedDoc& doc, const std::optional<BlockRange>& toc,
                                           const Deadline* deadline) {
    if (!toc) return std::nullopt;
    const Block* link = nullptr;
    for (std::size_t i = toc->begin; i < toc->end && !link; ++i) {
        const Block& b = doc.blocks[i];
        if (b.href && patterns::part_heading(b.text) == 2) link = &b;
    }
    for (std::size_t i = toc->begin; i < toc->end && !link; ++i) {
        const Block& b = doc.blocks[i];
        if (b.href && patterns::names_part2_item(b.text)) link = &b;
    }
    if (!link || link->href->size() < 2) return std::nullopt;

    const std::string target = link->href->substr(1);
    for (std::size_t i = 0; i < doc.blocks.size(); ++i) {
        if (expired(deadline)) return std::nullopt;
        const Block& b = doc.blocks[i];
        if (b.kind != BlockKind::Anchor || b.anchor_name != target) continue;
        std::size_t j = i;
        while (j < doc.blocks.size() && (doc.blocks[j].is_marker() || doc.blocks[j].text.empty())) ++j;
        if (j == 0 || j >= doc.blocks.size() || in_toc(toc, j)) return std::nullopt;
        return SplitPoint{j, Pillar::Hyperlink, Confidence::Exact};
    }
    return std::nullopt;
}

std::optional<SplitPoint> pillar_regex(const NormalizedDoc& doc, const std::optional<BlockRange>& toc,
                                       const Deadline* deadline) {
    for (std::size_t i = 1; i < doc.blocks.size(); ++i) {
        if (expired(deadline)) return std::nullopt;
        const Block& b = doc.blocks[i];
        if (b.is_marker() || in_toc(toc, i) || !styled_as_heading(b)) continue;
        if (patterns::part_heading(b.text) == 2) return SplitPoint{i, Pillar::Regex, Confidence::Exact};
    }
    return std::nullopt;
}

std::optional<SplitPoint> pillar_page_header(const NormalizedDoc& doc, const std::optional<BlockRange>& toc,
                                             const Deadline* deadline) {
    const auto& blocks = doc.blocks;
    for (std::size_t p = 0; p < blocks.size(); ++p) {
        if (blocks[p].kind != BlockKind::PageBreak) continue;
        std::size_t seen = 0;
        for (std::size_t i = p + 1; i < blocks.size() && seen < kPageHeaderDepth; ++i) {
            if (expired(deadline)) return std::nullopt;
            const Block& b = blocks[i];
            if (b.kind == BlockKind::PageBreak) break;
            if (b.is_marker() || b.text.empty()) continue;
            ++seen;
            if (in_toc(toc, i)) continue;
            if (patterns::part_heading(b.text) == 2 || patterns::names_part2_item(b.text)) {
                return SplitPoint{i, Pillar::PageHeader, Confidence::Heuristic};
            }
        }
    }
    return std::nullopt;
}

std::optional<SplitPoint> pillar_hyperlink(const NormalizedDoc& doc) {
    return pillar_hyperlink(doc, find_toc_region(doc));
}
std::optional<SplitPoint> pillar_regex(const NormalizedDoc& doc) { return pillar_regex(doc, find_toc_region(doc)); }
std::optional<SplitPoint> pillar_page_header(const NormalizedDoc& doc) {
    return pillar_page_header(doc, find_toc_region(doc));
}

std::size_t part1_start(const NormalizedDoc& doc, const std::optional<BlockRange>& toc, std::size_t split) {
    std::optional<std::size_t> unstyled;
    for (std::size_t i = 0; i < split && i < doc.blocks.size(); ++i) {
        const Block& b = doc.blocks[i];
        if (b.is_marker() || in_toc(toc, i) || patterns::part_heading(b.text) != 1) continue;
        if (styled_as_heading(b)) return i;
        if (!unstyled) unstyled = i;
    }
    if (unstyled) return *unstyled;
    if (toc && toc->end <= split) return toc->end;
    return 0;
}

PartitionResult divide_parts(const NormalizedDoc& doc, std::chrono::nanoseconds budget, const Clock& clock) {
    PartitionResult result{PartitionFailure{PartitionFailure::Reason::NoSplit}, {}, std::nullopt};
    const Deadline deadline(clock, budget);
    auto timeout = [&]() {
        result.outcome = PartitionFailure{PartitionFailure::Reason::Timeout};
        return result;
    };

    result.toc = find_toc_region(doc);
    using PillarFn = std::optional<SplitPoint> (*)(const NormalizedDoc&, const std::optional<BlockRange>&,
                                                   const Deadline*);
    const std::pair<Pillar, PillarFn> pillars[] = {
        {Pillar::Hyperlink, &pillar_hyperlink},
        {Pillar::Regex, &pillar_regex},
        {Pillar::PageHeader, &pillar_page_header},
    };

    for (const auto& [pillar, fn] : pillars) {
        if (deadline.expired()) return timeout();
        auto sp = fn(doc, result.toc, &deadline);
        if (deadline.expired()) return timeout();
        if (!sp) {
            result.trace.push_back({pillar, PillarAttempt::Outcome::NotFound, std::nullopt, ""});
            continue;
        }
        const std::size_t split = sp->block_index;
        const BlockRange part1{part1_start(doc, result.toc, split), split};
        const BlockRange part2{split, doc.blocks.size()};
        std::string reason;
        if (split == 0 || split >= doc.blocks.size() || part1.empty()) {
            reason = "empty Part I range";
        } else if (!has_item_keyword(doc, part1, 4, &deadline)) {
            reason = "Part I range has no Item 1-4 keyword outside tables";
        } else if (!has_item_keyword(doc, part2, 6, &deadline)) {
            reason = "Part II range has no Item 1-6 keyword outside tables";
        }
        if (deadline.expired()) return timeout();
        if (!reason.empty()) {
            result.trace.push_back({pillar, PillarAttempt::Outcome::Rejected, split, reason});
            continue;
        }
        result.trace.push_back({pillar, PillarAttempt::Outcome::Accepted, split, ""});
        result.outcome = PartSplit{part1, part2, *sp};
        return result;
    }
    return result;
}

nlohmann::json trace_to_json(const PartitionResult& r) {
    nlohmann::json j;
    j["ok"] = r.ok();
    if (r.ok()) {
        const auto& s = r.split();
        j["pillar"] = to_string(s.split.pillar);
        j["split_block"] = s.split.block_index;
        j["confidence"] = s.split.confidence == Confidence::Exact ? "exact" : "heuristic";
        j["part1"] = {s.part1.begin, s.part1.end};
        j["part2"] = {s.part2.begin, s.part2.end};
    } else {
        j["failure"] = to_string(r.failure().reason);
    }
    j["toc"] = r.toc ? nlohmann::json{r.toc->begin, r.toc->end} : nlohmann::json(nullptr);
    auto& attempts = j["attempts"] = nlohmann::json::array();
    for (const auto& a : r.trace) {
        nlohmann::json aj{{"pillar", to_string(a.pillar)}, {"outcome", to_string(a.outcome)}};
        if (a.block_index) aj["block"] = *a.block_index;
        if (!a.reason.empty()) aj["reason"] = a.reason;
        attempts.push_back(std::move(aj));
    }
    return j;
}

}  // namespace tenq::partition
