#include "tenq/synthetic.hpp"

#include <algorithm>
#include <cstdio>

#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/layout.hpp"

namespace tenq::eval {

std::uint64_t Rng::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::size_t Rng::below(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

std::size_t Rng::between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

bool Rng::chance(double p) { return p > 0 && uniform() < p; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed * 0x100000001B3ULL + index);
    r.next();
    return r.next() ^ index;
}

SyntheticSpec SyntheticSpec::clean(std::uint64_t seed, std::size_t n) {
    SyntheticSpec s;
    s.seed = seed;
    s.n_filings = n;
    return s;
}

SyntheticSpec SyntheticSpec::perturbed(std::uint64_t seed, std::size_t n, double p) {
    SyntheticSpec s = clean(seed, n);
    s.omit_toc = s.dangling_anchors = s.reworded_titles = s.in_paragraph_references = s.items_omitted =
        s.plain_text = s.unstyled_titles = p;
    return s;
}

void SyntheticSpec::validate() const {
    for (double p : {omit_toc, dangling_anchors, reworded_titles, in_paragraph_references, items_omitted, plain_text,
                     unstyled_titles}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("perturbation probabilities must lie in [0, 1]");
    }
}

nlohmann::json spec_to_json(const SyntheticSpec& s) {
    return {{"seed", s.seed},
            {"n_filings", s.n_filings},
            {"perturbations",
             {{"omit_toc", s.omit_toc},
              {"dangling_anchors", s.dangling_anchors},
              {"reworded_titles", s.reworded_titles},
              {"in_paragraph_references", s.in_paragraph_references},
              {"items_omitted", s.items_omitted},
              {"plain_text", s.plain_text},
              {"unstyled_titles", s.unstyled_titles}}},
            {"target_bytes", s.target_bytes}};
}

SyntheticSpec spec_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.seed = j.value("seed", std::uint64_t{1});
    s.n_filings = j.value("n_filings", std::size_t{10});
    const auto p = j.value("perturbations", nlohmann::json::object());
    s.omit_toc = p.value("omit_toc", 0.0);
    s.dangling_anchors = p.value("dangling_anchors", 0.0);
    s.reworded_titles = p.value("reworded_titles", 0.0);
    s.in_paragraph_references = p.value("in_paragraph_references", 0.0);
    s.items_omitted = p.value("items_omitted", 0.0);
    s.plain_text = p.value("plain_text", 0.0);
    s.unstyled_titles = p.value("unstyled_titles", 0.0);
    s.target_bytes = j.value("target_bytes", std::size_t{0});
    s.validate();
    return s;
}

bool GroundTruth::has(std::string_view perturbation) const {
    return std::find(perturbations.begin(), perturbations.end(), perturbation) != perturbations.end();
}

nlohmann::json truth_to_json(const GroundTruth& t) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : t.items) {
        items.push_back({{"part", it.part},
                         {"item_id", it.item_id},
                         {"title_block", it.title_block},
                         {"content_range", {it.content_range.begin, it.content_range.end}},
                         {"title_text", it.title_text},
                         {"has_keyword", it.has_keyword}});
    }
    nlohmann::json kws = nlohmann::json::array();
    for (const auto& k : t.keyword_blocks) {
        kws.push_back({{"block", k.block}, {"part", k.part}, {"in_toc", k.in_toc}, {"is_title", k.is_title}});
    }
    return {{"filing_id", t.filing_id},
            {"format", ingest::to_string(t.format)},
            {"block_count", t.block_count},
            {"part1_start", t.part1_start},
            {"split_block", t.split_block},
            {"toc", t.toc ? nlohmann::json{t.toc->begin, t.toc->end} : nlohmann::json(nullptr)},
            {"items", std::move(items)},
            {"keyword_blocks", std::move(kws)},
            {"perturbations", t.perturbations}};
}

GroundTruth truth_from_json(const nlohmann::json& j) {
    GroundTruth t;
    t.filing_id = j.at("filing_id").get<std::string>();
    t.format = ingest::format_from_string(j.at("format").get<std::string>());
    t.block_count = j.at("block_count").get<std::size_t>();
    t.part1_start = j.at("part1_start").get<std::size_t>();
    t.split_block = j.at("split_block").get<std::size_t>();
    if (!j.at("toc").is_null()) t.toc = BlockRange{j["toc"].at(0).get<std::size_t>(), j["toc"].at(1).get<std::size_t>()};
    for (const auto& it : j.at("items")) {
        t.items.push_back({it.at("part").get<int>(), it.at("item_id").get<std::string>(),
                           it.at("title_block").get<std::size_t>(),
                           {it.at("content_range").at(0).get<std::size_t>(), it.at("content_range").at(1).get<std::size_t>()},
                           it.at("title_text").get<std::string>(), it.value("has_keyword", true)});
    }
    for (const auto& k : j.at("keyword_blocks")) {
        t.keyword_blocks.push_back({k.at("block").get<std::size_t>(), k.at("part").get<int>(), k.at("in_toc").get<bool>(),
                                    k.at("is_title").get<bool>()});
    }
    t.perturbations = j.value("perturbations", std::vector<std::string>{});
    return t;
}

namespace {

// ---- word banks ----

const std::vector<std::string>& sentences() {
    static const std::vector<std::string> s = {
        "Revenue increased compared with the same period last year, driven primarily by higher volumes across our core "
        "product lines.",
        "Gross margin was affected by changes in product mix and by higher component costs during the quarter.",
        "We believe our existing cash, cash equivalents and marketable securities will be sufficient to meet our "
        "liquidity needs for at least the next twelve months.",
        "Operating expenses reflected continued investment in research and development as well as higher personnel "
        "costs.",
        "The Company evaluates its estimates on an ongoing basis, including those related to revenue recognition, "
        "inventories and income taxes.",
        "Changes in foreign currency exchange rates reduced reported net sales by a modest amount.",
        "Interest expense decreased as a result of lower average outstanding borrowings under the revolving credit "
        "facility.",
        "The effective tax rate differed from the statutory rate primarily due to the mix of earnings across "
        "jurisdictions.",
        "Capital expenditures were used mainly for manufacturing equipment, information systems and facility "
        "improvements.",
        "Accounts receivable are recorded at the invoiced amount and do not bear interest.",
        "Inventories are stated at the lower of cost or net realizable value, with cost determined on a first-in, "
        "first-out basis.",
        "Goodwill is tested for impairment annually in the fourth quarter, or more frequently if indicators of "
        "impairment exist.",
        "The unaudited condensed consolidated statements have been prepared on the same basis as the annual audited "
        "statements.",
        "In the opinion of management, all adjustments of a normal recurring nature considered necessary for a fair "
        "presentation have been included.",
        "Results for interim periods are not necessarily indicative of the results that may be expected for the full "
        "fiscal year.",
        "During the quarter the Company repurchased shares of its common stock under the program authorized by the "
        "Board of Directors.",
        "Deferred revenue consists primarily of payments received in advance of the satisfaction of performance "
        "obligations.",
        "The fair value of derivative instruments is determined using observable market inputs such as forward rates "
        "and yield curves.",
        "Stock-based compensation expense is recognized on a straight-line basis over the requisite service period of "
        "each award.",
        "Net cash provided by operating activities reflected higher net income partially offset by changes in working "
        "capital.",
        "We continue to monitor economic conditions, supply chain constraints and customer demand in each of our "
        "markets.",
        "Our exposure to changes in interest rates relates primarily to our investment portfolio and long-term debt.",
        "A hypothetical one hundred basis point increase in interest rates would not have had a material effect on the "
        "fair value of our portfolio.",
        "Management, with the participation of the principal executive and principal financial officers, evaluated the "
        "effectiveness of disclosure controls as of the end of the period.",
        "There were no changes in internal control over financial reporting during the quarter that materially "
        "affected, or are reasonably likely to materially affect, internal control.",
        "From time to time the Company is involved in claims and lawsuits arising in the ordinary course of business.",
        "Although the outcome of these matters cannot be predicted with certainty, management does not believe they "
        "will have a material adverse effect.",
        "Our business is subject to numerous uncertainties, and the occurrence of any of them could harm our operating "
        "results.",
        "We depend on a limited number of suppliers for certain components, and any disruption could delay shipments to "
        "customers.",
        "Competition in our markets is intense and could reduce our market share and margins.",
        "Sales to distributors are recognized when control of the products transfers to the distributor.",
        "The credit agreement contains customary covenants, and the Company was in compliance with all of them as of "
        "the balance sheet date.",
        "Amortization of acquired intangible assets is recorded on a straight-line basis over estimated useful lives.",
        "Warranty obligations are estimated from historical claim rates and are reviewed each quarter.",
        "Lease liabilities are measured at the present value of the remaining lease payments.",
        "Backlog at the end of the quarter was higher than at the end of the prior fiscal year.",
    };
    return s;
}

const std::vector<std::string>& companies() {
    static const std::vector<std::string> c = {
        "Northwind Instruments", "Harbor Lane Foods",   "Bluestem Energy",   "Cobalt Ridge Systems",
        "Meridian Apparel",      "Granite Peak Capital", "Silverline Medical", "Orchard Valley Bancorp",
        "Tallgrass Logistics",   "Keystone Polymer",     "Juniper Semiconductor", "Redwood Hospitality",
    };
    return c;
}

const std::vector<std::string>& risk_headlines() {
    static const std::vector<std::string> r = {
        "We face intense competition in each of our markets.",
        "Disruptions in our supply chain could adversely affect our results.",
        "Our operating results may fluctuate significantly from quarter to quarter.",
        "We may not be able to protect our intellectual property.",
        "Changes in tax laws could affect our effective tax rate.",
        "Cybersecurity incidents could harm our reputation and business.",
        "Our indebtedness could limit our operating flexibility.",
    };
    return r;
}

const std::vector<std::string>& note_topics() {
    static const std::vector<std::string> n = {
        "Basis of Presentation", "Revenue", "Inventories", "Goodwill and Intangible Assets", "Debt",
        "Income Taxes", "Earnings Per Share", "Commitments and Contingencies", "Segment Information",
        "Fair Value Measurements", "Leases", "Stockholders' Equity",
    };
    return n;
}

const std::vector<std::string>& line_items() {
    static const std::vector<std::string> l = {
        "Cash and cash equivalents", "Accounts receivable, net", "Inventories", "Prepaid expenses",
        "Property and equipment, net", "Goodwill", "Accounts payable", "Accrued liabilities",
        "Long-term debt", "Total stockholders' equity", "Net sales", "Cost of sales", "Gross profit",
        "Selling, general and administrative", "Research and development", "Operating income",
        "Income tax expense", "Net income",
    };
    return l;
}

// ---- layout entries ----

enum class EK { Para, Styled, Row, PageBreak, Anchor };

struct Entry {
    EK kind = EK::Para;
    std::string text;
    std::vector<std::string> cells;
    bool bold = false;
    bool centered = false;
    bool heading_tag = false;
    std::size_t indent = 0;  // text mode only
    std::string anchor;
    std::string href;
    // bookkeeping
    bool keyword = false;
    bool title = false;
    bool toc = false;
    int part = 0;
};

struct Plan {
    std::string filing_id;
    std::string cik;
    std::string company;
    std::string period_end;
    int fiscal_year = 2019;
    bool text_mode = false;
    bool omit_toc = false;
    bool dangling = false;
    bool reworded = false;
    bool references = false;
    bool omitted = false;
    bool unstyled = false;
    int markup = 0;      // html dialect 0..2
    int label_style = 0;
    bool upper_titles = false;
    std::vector<std::pair<int, std::string>> omitted_items;
};

std::string pad_number(std::uint64_t v, int width) {
    std::string s = std::to_string(v);
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
    return s;
}

std::string upper(std::string s) {
    for (auto& c : s) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return s;
}

std::string money(Rng& rng) {
    std::uint64_t v = rng.between(120, 98000);
    std::string s = std::to_string(v);
    for (int pos = static_cast<int>(s.size()) - 3; pos > 0; pos -= 3) s.insert(static_cast<std::size_t>(pos), ",");
    return s;
}

class Composer {
public:
    Composer(const Plan& plan, Rng& rng, Rng& filler, std::size_t extra_paragraphs)
        : plan_(plan), rng_(rng), filler_(filler), extra_(extra_paragraphs) {}

    std::vector<Entry> entries;
    GroundTruth truth;

    void compose() {
        cover();
        if (!plan_.omit_toc) toc();
        page_break();
        truth.part1_start = part_heading(1);
        for (const auto& item : canonical_items(1)) {
            if (is_omitted(item)) continue;
            item_section(item);
        }
        page_break();
        truth.split_block = part_heading(2);
        for (const auto& item : canonical_items(2)) {
            if (is_omitted(item)) continue;
            item_section(item);
        }
        signatures();
        close_items();
    }

private:
    bool text() const { return plan_.text_mode; }

    std::size_t add(Entry e) {
        e.part = current_part_;
        entries.push_back(std::move(e));
        return entries.size() - 1;
    }

    std::size_t para(std::string t, std::size_t indent = 0) {
        Entry e;
        e.text = std::move(t);
        e.indent = indent;
        return add(std::move(e));
    }

    std::size_t styled(std::string t, bool bold, bool centered, bool heading_tag = false) {
        Entry e;
        e.kind = EK::Styled;
        e.text = std::move(t);
        e.bold = bold;
        e.centered = centered;
        e.heading_tag = heading_tag && !text();
        if (text() && !centered) e.indent = 2;
        return add(std::move(e));
    }

    std::size_t row(std::vector<std::string> cells, std::string href = {}) {
        Entry e;
        e.kind = EK::Row;
        e.cells = std::move(cells);
        if (!text()) e.href = std::move(href);
        return add(std::move(e));
    }

    void anchor(const std::string& name) {
        if (text()) return;
        Entry e;
        e.kind = EK::Anchor;
        e.anchor = plan_.dangling ? name + "_x" : name;
        add(std::move(e));
    }

    void page_break() {
        Entry num;
        num.kind = EK::Styled;
        num.centered = true;
        num.text = std::to_string(++page_);
        add(std::move(num));
        Entry e;
        e.kind = EK::PageBreak;
        add(std::move(e));
    }

    std::string dash() const { return text() ? "-" : "—"; }

    std::string paragraph_text(Rng& r, std::size_t lo = 2, std::size_t hi = 4) {
        std::string out;
        const std::size_t n = r.between(lo, hi);
        for (std::size_t k = 0; k < n; ++k) {
            if (k) out += ' ';
            out += r.pick(sentences());
        }
        return out;
    }

    void body_paragraphs(std::size_t lo, std::size_t hi) {
        const std::size_t n = rng_.between(lo, hi);
        for (std::size_t k = 0; k < n; ++k) {
            para(paragraph_text(rng_));
            maybe_reference();
        }
    }

    void maybe_reference(bool force = false) {
        if (!plan_.references || !(force || rng_.chance(0.25))) return;
        const auto& layout = canonical_layout();
        const auto& target = layout[rng_.below(layout.size())];
        const std::string part = target.part == 1 ? "I" : "II";
        const std::string id = target.item_id;
        std::string t;
        switch (rng_.below(4)) {
            case 0:
                t = "For additional information, see Part " + part + ", Item " + id + ", \"" + target.official_title +
                    ",\" of this Quarterly Report on Form 10-Q, which is incorporated herein by reference and should "
                    "be read in conjunction with the discussion above.";
                break;
            case 1:
                t = "As previously disclosed under Item " + id + " of Part " + part +
                    " in our most recent Annual Report on Form 10-K, there have been no material changes to the "
                    "matters described therein during the current period.";
                break;
            case 2:
                t = "The information required by Item " + id +
                    " is included in the notes to the condensed consolidated statements and in the discussion of "
                    "liquidity above, and is incorporated herein by reference.";
                break;
            default:
                t = "Certain of these matters are described in more detail in Item " + id + " of Part " + part +
                    " of this report, and readers should consider them together with the cautionary statements "
                    "regarding forward-looking information.";
                break;
        }
        const auto idx = para(t);
        entries[idx].keyword = true;
    }

    void cover() {
        current_part_ = 0;
        styled("UNITED STATES", true, true);
        styled("SECURITIES AND EXCHANGE COMMISSION", true, true);
        styled("Washington, D.C. 20549", false, true);
        styled("FORM 10-Q", true, true);
        para("QUARTERLY REPORT PURSUANT TO SECTION 13 OR 15(d) OF THE SECURITIES EXCHANGE ACT OF 1934");
        para("For the quarterly period ended " + plan_.period_end);
        para("Commission File Number: 001-" + pad_number(rng_.between(10000, 99999), 5));
        styled(plan_.company + (rng_.chance(0.5) ? " Inc." : " Corporation"), true, true);
        para("(Exact name of registrant as specified in its charter)");
        row({"Title of each class", "Trading Symbol(s)", "Name of each exchange on which registered"});
        row({"Common Stock, $0.01 par value", upper(plan_.company.substr(0, 4)), "The Nasdaq Stock Market LLC"});
        para("Indicate by check mark whether the registrant has submitted electronically every Interactive Data File "
             "required to be submitted pursuant to Rule 405 of Regulation S-T during the preceding 12 months.");
        para("Yes [X] No [ ]");
        para("As of " + plan_.period_end + ", there were " + money(rng_) + ",000 shares of the registrant's common "
             "stock outstanding.");
        page_break();
    }

    std::string toc_title_cell(const CanonicalItem& item) const {
        return plan_.upper_titles ? upper(item.official_title) : item.official_title;
    }

    void toc() {
        styled("TABLE OF CONTENTS", true, true);
        row({"", "Page"});
        auto part_row = [&](int part) {
            const std::string t = part == 1 ? "PART I. FINANCIAL INFORMATION" : "PART II. OTHER INFORMATION";
            auto idx = row({t}, part == 1 ? "#part_i" : "#part_ii");
            entries[idx].toc = true;
            return idx;
        };
        std::size_t first = part_row(1), last = first;
        for (int part = 1; part <= 2; ++part) {
            if (part == 2) last = part_row(2);
            for (const auto& item : canonical_items(part)) {
                if (is_omitted(item)) continue;
                std::string label = "Item " + item.item_id + ".";
                std::string href = "#item_" + std::to_string(part) + "_" + item.item_id;
                last = row({label, toc_title_cell(item), std::to_string(rng_.between(3, 60))}, href);
                entries[last].toc = true;
                entries[last].keyword = true;
            }
        }
        truth.toc = BlockRange{first, last + 1};
    }

    std::size_t part_heading(int part) {
        current_part_ = part;
        anchor(part == 1 ? "part_i" : "part_ii");
        std::string t;
        switch (plan_.markup) {
            case 0: t = part == 1 ? "PART I " + dash() + " FINANCIAL INFORMATION" : "PART II " + dash() + " OTHER INFORMATION"; break;
            case 1: t = part == 1 ? "PART I. FINANCIAL INFORMATION" : "PART II. OTHER INFORMATION"; break;
            default: t = part == 1 ? "Part I - Financial Information" : "Part II - Other Information"; break;
        }
        if (plan_.unstyled) return para(t);
        return styled(t, true, true, plan_.markup == 2);
    }

    bool is_omitted(const CanonicalItem& item) const {
        return std::find(plan_.omitted_items.begin(), plan_.omitted_items.end(),
                         std::make_pair(item.part, item.item_id)) != plan_.omitted_items.end();
    }

    std::string label_for(const CanonicalItem& item, bool reword) {
        const std::string& id = item.item_id;
        if (reword && id == "1A") {
            const std::size_t v = rng_.below(3);
            return v == 0 ? "Item 1-A." : v == 1 ? "Item 1(a)." : "ITEM 1A:";
        }
        switch (plan_.label_style) {
            case 0: return "Item " + id + ".";
            case 1: return "ITEM " + id + ".";
            case 2: return "Item " + id + ":";
            default: return "Item " + id + " -";
        }
    }

    void item_section(const CanonicalItem& item) {
        const bool reword = plan_.reworded && rng_.chance(0.5);
        const bool drop_label = reword && rng_.chance(0.5);
        std::string title = item.official_title;
        if (item.part == 1 && item.item_id == "2") {
            title = "Management's Discussion and Analysis of Financial Condition and Results of Operations";
        } else if (item.part == 1 && item.item_id == "1" && rng_.chance(0.4)) {
            title = "Condensed Consolidated Financial Statements (Unaudited)";
        }
        if (plan_.upper_titles) title = upper(title);
        std::string full = drop_label ? title : label_for(item, reword) + " " + title;

        page_break_maybe(0.5);
        anchor("item_" + std::to_string(item.part) + "_" + item.item_id);

        // Text renderings wrap long titles; the first line is the title block.
        std::string continuation;
        if (text() && full.size() > 72) {
            std::size_t cut = full.rfind(' ', 72);
            continuation = full.substr(cut + 1);
            full = full.substr(0, cut);
        }
        std::size_t idx;
        if (plan_.unstyled) {
            idx = para(full);
        } else if (text()) {
            idx = rng_.chance(0.5) && full.size() <= 70 ? styled(full, false, true) : para(full, 3);
        } else {
            idx = styled(full, true, rng_.chance(0.3));
        }
        entries[idx].title = true;
        entries[idx].keyword = !drop_label;
        if (!continuation.empty()) para(continuation, plan_.unstyled ? 0 : 3);
        open_item(item, idx, full, !drop_label);

        section_body(item);
    }

    void open_item(const CanonicalItem& item, std::size_t idx, const std::string& text, bool keyword) {
        close_items(idx);
        pending_ = TruthItem{item.part, item.item_id, idx, {idx + 1, 0}, text, keyword};
    }

    void close_items(std::optional<std::size_t> next_title = std::nullopt) {
        if (pending_) {
            pending_->content_range.end = next_title.value_or(entries.size());
            // Part I items end where Part II starts.
            if (pending_->part == 1 && truth.split_block > pending_->title_block)
                pending_->content_range.end = truth.split_block;
            truth.items.push_back(*pending_);
            pending_.reset();
        }
    }

    void page_break_maybe(double p) {
        if (rng_.chance(p)) page_break();
    }

    void subheading(const std::string& t) {
        if (plan_.unstyled && text()) {
            para(t);
            return;
        }
        styled(t, true, false);
    }

    void section_body(const CanonicalItem& item) {
        const std::string key = std::to_string(item.part) + "_" + item.item_id;
        if (key == "1_1") {
            for (const char* caption : {"CONDENSED CONSOLIDATED BALANCE SHEETS", "CONDENSED CONSOLIDATED STATEMENTS OF OPERATIONS"}) {
                styled(caption, true, true);
                styled("(Unaudited, in thousands)", false, true);
                row({"", "Current period", "Prior period"});
                const std::size_t n = rng_.between(5, 9);
                for (std::size_t k = 0; k < n; ++k) row({rng_.pick(line_items()), money(rng_), money(rng_)});
                page_break_maybe(0.4);
            }
            styled("NOTES TO CONDENSED CONSOLIDATED FINANCIAL STATEMENTS", true, true);
            const std::size_t notes = rng_.between(3, 6);
            for (std::size_t k = 0; k < notes; ++k) {
                subheading("Note " + std::to_string(k + 1) + " " + dash() + " " + rng_.pick(note_topics()));
                body_paragraphs(1, 3);
            }
        } else if (key == "1_2") {
            for (const char* h : {"Overview", "Results of Operations", "Liquidity and Capital Resources",
                                  "Critical Accounting Estimates"}) {
                subheading(h);
                body_paragraphs(1, 3);
                if (rng_.chance(0.4)) {
                    for (std::size_t k = 0; k < 3; ++k) row({rng_.pick(line_items()), money(rng_), money(rng_)});
                }
            }
            maybe_reference(true);
            for (std::size_t k = 0; k < extra_; ++k) {
                para(paragraph_text(filler_, 3, 5));
                if (k % 6 == 5) page_break();
            }
        } else if (key == "1_3" || key == "2_1" || key == "2_5") {
            body_paragraphs(1, 2);
        } else if (key == "1_4") {
            subheading("Evaluation of Disclosure Controls and Procedures");
            body_paragraphs(1, 2);
            subheading("Changes in Internal Control over Financial Reporting");
            body_paragraphs(1, 1);
        } else if (key == "2_1A") {
            body_paragraphs(1, 1);
            const std::size_t n = rng_.between(2, 5);
            for (std::size_t k = 0; k < n; ++k) {
                subheading(rng_.pick(risk_headlines()));
                body_paragraphs(1, 2);
            }
        } else if (key == "2_2") {
            row({"Period", "Shares purchased", "Average price"});
            for (int m = 1; m <= 3; ++m) row({"Month " + std::to_string(m), money(rng_), "$" + std::to_string(rng_.between(10, 99)) + ".00"});
            body_paragraphs(1, 1);
        } else if (key == "2_3") {
            para("None.");
        } else if (key == "2_4") {
            para("Not applicable.");
        } else if (key == "2_6") {
            row({"Exhibit", "Description"});
            row({"31.1", "Certification of Principal Executive Officer pursuant to Rule 13a-14(a)"});
            row({"31.2", "Certification of Principal Financial Officer pursuant to Rule 13a-14(a)"});
            row({"32.1", "Certifications pursuant to 18 U.S.C. Section 1350"});
            row({"101.INS", "Inline XBRL Instance Document"});
        }
    }

    void signatures() {
        if (plan_.unstyled) para("SIGNATURES");
        else styled("SIGNATURES", true, true);
        para("Pursuant to the requirements of the Securities Exchange Act of 1934, the registrant has duly caused this "
             "report to be signed on its behalf by the undersigned thereunto duly authorized.");
        para(plan_.company);
        para("Date: " + plan_.period_end);
        para("/s/ " + std::string(rng_.chance(0.5) ? "Jordan Lee" : "Morgan Avery"));
        para("Chief Financial Officer");
    }

    const Plan& plan_;
    Rng& rng_;
    Rng& filler_;
    std::size_t extra_;
    int current_part_ = 0;
    int page_ = 0;
    std::optional<TruthItem> pending_;
};

// ---- rendering ----

std::string html_escape(std::string_view s, int markup) {
    std::string out;
    out.reserve(s.size() + 8);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '\'' && markup == 1) out += "&#8217;";
        else if (c == '"' && markup == 2) out += "&quot;";
        else if (c == ' ' && markup == 2 && i > 0 && s[i - 1] == 'm' && i >= 4 && s.substr(i - 4, 4) == "Item")
            out += "&nbsp;";
        else out += c;
    }
    return out;
}

// Text as the normalizer will report it.
std::string display_text(const std::string& s, int markup) {
    if (markup != 1) return s;
    std::string out;
    for (char c : s) {
        if (c == '\'') out += "’";
        else out += c;
    }
    return out;
}

std::string render_html(const std::vector<Entry>& entries, const Plan& plan) {
    const int m = plan.markup;
    std::string out;
    out.reserve(entries.size() * 120);
    out += "<html>\n<head>\n<title>" + html_escape(plan.company, m) + " 10-Q</title>\n";
    out += "<style>p { margin: 0 }</style>\n</head>\n<body style=\"font-family:'Times New Roman'\">\n";
    bool in_table = false;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& e = entries[i];
        if (e.kind != EK::Row && in_table) {
            out += m == 2 ? "</TABLE>\n" : "</table>\n";
            in_table = false;
        }
        switch (e.kind) {
            case EK::Para:
                if (m == 0) out += "<p style=\"margin-top:6pt;text-align:justify\">" + html_escape(e.text, m) + "</p>\n";
                else if (m == 1)
                    out += "<div style=\"margin-top:6pt\"><span style=\"font-family:'Times New Roman';font-size:10pt\">" +
                           html_escape(e.text, m) + "</span></div>\n";
                else out += "<P>" + html_escape(e.text, m) + "\n";
                break;
            case EK::Styled: {
                const std::string t = html_escape(e.text, m);
                if (e.heading_tag) {
                    out += std::string("<h2") + (e.centered ? " align=\"center\"" : "") + ">" + t + "</h2>\n";
                } else if (m == 0) {
                    out += std::string("<p") + (e.centered ? " align=\"center\"" : "") + ">" + (e.bold ? "<b>" : "") + t +
                           (e.bold ? "</b>" : "") + "</p>\n";
                } else if (m == 1) {
                    out += std::string("<div style=\"margin-top:12pt") + (e.centered ? ";text-align:center" : "") +
                           "\"><span style=\"font-size:10pt" + (e.bold ? ";font-weight:700" : "") + "\">" + t +
                           "</span></div>\n";
                } else {
                    out += std::string("<P") + (e.centered ? " ALIGN=CENTER" : "") + ">" +
                           (e.bold ? "<FONT STYLE=\"font-weight:bold\">" : "") + t + (e.bold ? "</FONT>" : "") + "\n";
                }
                break;
            }
            case EK::Row: {
                if (!in_table) {
                    out += m == 2 ? "<TABLE WIDTH=100%>\n" : "<table style=\"width:100%;border-collapse:collapse\">\n";
                    in_table = true;
                }
                out += m == 2 ? "<TR>" : "<tr>";
                for (std::size_t c = 0; c < e.cells.size(); ++c) {
                    std::string cell = html_escape(e.cells[c], m);
                    if (!e.href.empty() && c == (e.cells.size() == 1 ? 0 : 1)) {
                        cell = "<a href=\"" + e.href + "\">" + cell + "</a>";
                    }
                    if (m == 2) out += "<TD>" + cell;
                    else out += "<td style=\"vertical-align:top\">" + cell + "</td>";
                }
                out += m == 2 ? "\n" : "</tr>\n";
                break;
            }
            case EK::PageBreak:
                if (m == 1) out += "<div style=\"page-break-after:always\"></div>\n";
                else out += m == 2 ? "<HR>\n" : "<hr noshade>\n";
                break;
            case EK::Anchor:
                if (m == 1) out += "<div id=\"" + e.anchor + "\"></div>\n";
                else out += (m == 2 ? "<A NAME=\"" : "<a name=\"") + e.anchor + (m == 2 ? "\"></A>\n" : "\"></a>\n");
                break;
        }
    }
    if (in_table) out += m == 2 ? "</TABLE>\n" : "</table>\n";
    out += "</body>\n</html>\n";
    return out;
}

std::string render_text(const std::vector<Entry>& entries) {
    std::string out;
    out.reserve(entries.size() * 100);
    auto centered = [](const std::string& t) {
        const std::size_t w = t.size();
        const std::size_t left = w >= 78 ? 1 : (80 - w) / 2;
        return std::string(left, ' ') + t;
    };
    for (const Entry& e : entries) {
        switch (e.kind) {
            case EK::Para: out += std::string(e.indent, ' ') + e.text + "\n\n"; break;
            case EK::Styled: out += (e.centered ? centered(e.text) : std::string(e.indent, ' ') + e.text) + "\n\n"; break;
            case EK::Row: {
                std::string line = "    ";
                for (std::size_t c = 0; c < e.cells.size(); ++c) {
                    std::string cell = e.cells[c].empty() ? "" : e.cells[c];
                    line += cell;
                    const std::size_t width = c == 0 ? 12 : 40;
                    if (c + 1 < e.cells.size()) line += std::string(cell.size() < width ? width - cell.size() : 2, ' ');
                }
                // Rows whose first cell is empty still need visible text.
                out += line + "\n";
                break;
            }
            case EK::PageBreak: out += "\f\n"; break;
            case EK::Anchor: break;
        }
    }
    return out;
}

std::string envelope(const Plan& plan, const std::string& body, bool html) {
    const std::string dashed = ingest::dashed_accession(plan.filing_id);
    std::string out;
    out += "<SEC-DOCUMENT>" + dashed + ".txt : " + std::to_string(plan.fiscal_year) + "0801\n";
    out += "<SEC-HEADER>" + dashed + ".hdr.sgml : " + std::to_string(plan.fiscal_year) + "0801\n";
    out += "ACCESSION NUMBER:\t\t" + dashed + "\n";
    out += "CONFORMED SUBMISSION TYPE:\t10-Q\n";
    out += "PUBLIC DOCUMENT COUNT:\t\t2\n";
    out += "CONFORMED PERIOD OF REPORT:\t" + std::to_string(plan.fiscal_year) + "0630\n";
    out += "FILER:\n\tCOMPANY DATA:\n\t\tCOMPANY CONFORMED NAME:\t\t\t" + upper(plan.company) + "\n";
    out += "\t\tCENTRAL INDEX KEY:\t\t\t" + plan.cik + "\n";
    out += "</SEC-HEADER>\n";
    out += "<DOCUMENT>\n<TYPE>10-Q\n<SEQUENCE>1\n<FILENAME>" + std::string(html ? "form10q.htm" : "form10q.txt") + "\n";
    out += "<DESCRIPTION>QUARTERLY REPORT\n<TEXT>\n";
    out += body;
    out += "</TEXT>\n</DOCUMENT>\n";
    out += "<DOCUMENT>\n<TYPE>EX-31.1\n<SEQUENCE>2\n<FILENAME>ex31-1.txt\n<TEXT>\n";
    out += "CERTIFICATION\n\nI have reviewed this quarterly report on Form 10-Q of " + plan.company + ".\n";
    out += "</TEXT>\n</DOCUMENT>\n</SEC-DOCUMENT>\n";
    return out;
}

Plan make_plan(const SyntheticSpec& spec, std::size_t index, Rng& rng) {
    Plan p;
    p.cik = pad_number(rng.between(1000, 1999999), 10);
    p.fiscal_year = static_cast<int>(2010 + rng.below(14));
    p.filing_id = p.cik + pad_number(static_cast<std::uint64_t>(p.fiscal_year % 100), 2) + pad_number(index + 1, 6);
    p.company = rng.pick(companies());
    static const std::vector<std::string> months = {"March 31", "June 30", "September 30"};
    p.period_end = rng.pick(months) + ", " + std::to_string(p.fiscal_year);
    p.markup = static_cast<int>(rng.below(3));
    p.label_style = static_cast<int>(rng.below(4));
    p.upper_titles = rng.chance(0.3);

    p.omit_toc = rng.chance(spec.omit_toc);
    p.dangling = rng.chance(spec.dangling_anchors);
    p.reworded = rng.chance(spec.reworded_titles);
    p.references = rng.chance(spec.in_paragraph_references);
    p.omitted = rng.chance(spec.items_omitted);
    p.text_mode = rng.chance(spec.plain_text);
    p.unstyled = rng.chance(spec.unstyled_titles);
    if (p.omitted) {
        if (rng.chance(0.3)) p.omitted_items.emplace_back(1, "3");
        std::vector<std::string> part2 = {"1", "1A", "2", "3", "4", "5"};
        const std::size_t n = rng.between(1, 3);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t at = rng.below(part2.size());
            p.omitted_items.emplace_back(2, part2[at]);
            part2.erase(part2.begin() + static_cast<std::ptrdiff_t>(at));
        }
    }
    return p;
}

struct Built {
    std::string body;
    GroundTruth truth;
};

Built build(const SyntheticSpec& spec, std::size_t index, const Plan& plan, std::size_t extra) {
    Rng rng(mix_seed(spec.seed, index) ^ 0xC0FFEEULL);
    Rng filler(mix_seed(spec.seed, index) ^ 0xF111E5ULL);
    Composer c(plan, rng, filler, extra);
    c.compose();
    if (!plan.text_mode) {
        for (auto& e : c.entries) {
            e.text = display_text(e.text, plan.markup);
            for (auto& cell : e.cells) cell = display_text(cell, plan.markup);
        }
        for (auto& item : c.truth.items) item.title_text = display_text(item.title_text, plan.markup);
    }
    Built b;
    b.truth = std::move(c.truth);
    b.truth.filing_id = plan.filing_id;
    b.truth.format = plan.text_mode ? FilingFormat::PlainText : FilingFormat::Html;
    b.truth.block_count = c.entries.size();
    for (std::size_t i = 0; i < c.entries.size(); ++i) {
        const auto& e = c.entries[i];
        if (e.keyword) b.truth.keyword_blocks.push_back({i, e.part, e.toc, e.title});
    }
    if (plan.omit_toc) b.truth.perturbations.push_back("omit_toc");
    if (plan.dangling) b.truth.perturbations.push_back("dangling_anchors");
    if (plan.reworded) b.truth.perturbations.push_back("reworded_titles");
    if (plan.references) b.truth.perturbations.push_back("in_paragraph_references");
    if (plan.omitted) b.truth.perturbations.push_back("items_omitted");
    if (plan.text_mode) b.truth.perturbations.push_back("plain_text");
    if (plan.unstyled) b.truth.perturbations.push_back("unstyled_titles");
    b.body = plan.text_mode ? render_text(c.entries) : render_html(c.entries, plan);
    return b;
}

}  // namespace

SyntheticFiling generate_filing(const SyntheticSpec& spec, std::size_t index) {
    spec.validate();
    Rng plan_rng(mix_seed(spec.seed, index));
    const Plan plan = make_plan(spec, index, plan_rng);

    std::size_t extra = 0;
    Built b = build(spec, index, plan, extra);
    for (int round = 0; round < 6 && spec.target_bytes > 0 && b.body.size() < spec.target_bytes; ++round) {
        // Filler paragraphs average roughly 480 rendered bytes.
        extra += (spec.target_bytes - b.body.size()) / 480 + 1;
        b = build(spec, index, plan, extra);
    }

    SyntheticFiling f;
    f.filing_id = plan.filing_id;
    f.truth = std::move(b.truth);
    f.raw = envelope(plan, b.body, !plan.text_mode);
    return f;
}

std::vector<CorpusEntry> generate_corpus(const SyntheticSpec& spec, const fs::path& out_dir) {
    spec.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<CorpusEntry> out;
    for (std::size_t i = 0; i < spec.n_filings; ++i) {
        const SyntheticFiling f = generate_filing(spec, i);
        CorpusEntry e{f.filing_id, out_dir / (f.filing_id + ".txt"), out_dir / (f.filing_id + ".truth.json")};
        write_file_atomic(e.raw_path, f.raw);
        write_file_atomic(e.truth_path, truth_to_json(f.truth).dump(1) + "\n");
        out.push_back(std::move(e));
    }
    write_file_atomic(out_dir / "corpus.json", spec_to_json(spec).dump(2) + "\n");
    return out;
}

std::vector<CorpusEntry> list_corpus(const fs::path& dir) {
    std::vector<CorpusEntry> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext != ".txt" && ext != ".htm" && ext != ".html") continue;
        CorpusEntry c;
        c.filing_id = entry.path().stem().string();
        c.raw_path = entry.path();
        const auto truth = dir / (c.filing_id + ".truth.json");
        if (fs::exists(truth)) c.truth_path = truth;
        out.push_back(std::move(c));
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.raw_path < b.raw_path; });
    return out;
}

GroundTruth read_truth(const fs::path& path) { return truth_from_json(nlohmann::json::parse(read_file(path))); }

}  // namespace tenq::eval
