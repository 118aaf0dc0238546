#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tenq/clock.hpp"
#include "tenq/docmodel.hpp"

namespace tenq::partition {

enum class Pillar { Hyperlink, Regex, PageHeader };
enum class Confidence { Exact, Heuristic };

const char* to_string(Pillar p);

struct SplitPoint {
    std::size_t block_index = 0;  // first block of Part II
    Pillar pillar = Pillar::Regex;
    Confidence confidence = Confidence::Exact;
};

struct PartSplit {
    BlockRange part1;
    BlockRange part2;
    SplitPoint split;
};

struct PartitionFailure {
    enum class Reason { NoSplit, Timeout };
    Reason reason = Reason::NoSplit;
};

const char* to_string(PartitionFailure::Reason r);

struct PillarAttempt {
    enum class Outcome { NotFound, Rejected, Accepted, Skipped };
    Pillar pillar;
    Outcome outcome;
    std::optional<std::size_t> block_index;
    std::string reason;
};

struct PartitionResult {
    std::variant<PartSplit, PartitionFailure> outcome;
    std::vector<PillarAttempt> trace;
    std::optional<BlockRange> toc;

    bool ok() const { return std::holds_alternative<PartSplit>(outcome); }
    const PartSplit& split() const { return std::get<PartSplit>(outcome); }
    const PartitionFailure& failure() const { return std::get<PartitionFailure>(outcome); }
};

nlohmann::json trace_to_json(const PartitionResult& r);

inline constexpr std::size_t kTocWindow = 40;
inline constexpr std::size_t kTocMinLinks = 3;
inline constexpr std::size_t kPageHeaderDepth = 3;
inline constexpr std::chrono::milliseconds kDefaultBudget{5000};

// Table-of-contents region: the 40-block window with the most internal links
// (at least 3; ties go to the earliest), trimmed to its first and last linked
// block. Documents without link TOCs fall back to a dense run of item/part
// headings whose item numbering restarts.
std::optional<BlockRange> find_toc_region(const NormalizedDoc& doc);

// Blocks that look like a Part/Item title in isolation: a part heading or a
// leading item label, at most 120 characters.
bool is_title_like(const Block& b);

std::optional<SplitPoint> pillar_hyperlink(const NormalizedDoc& doc, const std::optional<BlockRange>& toc,
                                           const Deadline* deadline = nullptr);
std::optional<SplitPoint> pillar_regex(const NormalizedDoc& doc, const std::optional<BlockRange>& toc,
                                       const Deadline* deadline = nullptr);
std::optional<SplitPoint> pillar_page_header(const NormalizedDoc& doc, const std::optional<BlockRange>& toc,
                                             const Deadline* deadline = nullptr);

std::optional<SplitPoint> pillar_hyperlink(const NormalizedDoc& doc);
std::optional<SplitPoint> pillar_regex(const NormalizedDoc& doc);
std::optional<SplitPoint> pillar_page_header(const NormalizedDoc& doc);

// Block where Part I starts given a split: the first qualifying "PART I" heading
// outside the TOC, else the block after the TOC, else 0.
std::size_t part1_start(const NormalizedDoc& doc, const std::optional<BlockRange>& toc, std::size_t split);

PartitionResult divide_parts(const NormalizedDoc& doc, std::chrono::nanoseconds budget = kDefaultBudget,
                             const Clock& clock = steady_clock());

}  // namespace tenq::partition
