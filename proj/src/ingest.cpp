#include "tenq/ingest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/text_util.hpp"

namespace tenq::ingest {

namespace fs = std::filesystem;

const char* to_string(FilingFormat f) {
    return f == FilingFormat::Html ? "html" : "text";
}

FilingFormat format_from_string(std::string_view s) {
    if (s == "html") return FilingFormat::Html;
    if (s == "text") return FilingFormat::PlainText;
    throw Error("unknown filing format: " + std::string(s));
}

std::string normalize_accession(std::string_view accession_id) {
    std::string digits;
    digits.reserve(18);
    for (char c : accession_id) {
        if (c == '-') continue;
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw InvalidAccession("accession id has non-digit characters: " + std::string(accession_id));
        }
        digits.push_back(c);
    }
    if (digits.size() != 18) {
        throw InvalidAccession("accession id must have 18 digits: " + std::string(accession_id));
    }
    return digits;
}

std::string dashed_accession(std::string_view accession_id) {
    auto d = normalize_accession(accession_id);
    return d.substr(0, 10) + "-" + d.substr(10, 2) + "-" + d.substr(12);
}

std::vector<EmbeddedDocument> strip_sgml_envelope(std::string_view raw) {
    static constexpr std::string_view kOpen = "<DOCUMENT>";
    static constexpr std::string_view kClose = "</DOCUMENT>";
    static constexpr std::string_view kType = "<TYPE>";
    static constexpr std::string_view kTextOpen = "<TEXT>";
    static constexpr std::string_view kTextClose = "</TEXT>";

    std::vector<EmbeddedDocument> out;
    std::size_t pos = raw.find(kOpen);
    if (pos == std::string_view::npos) {
        out.push_back({"RAW", std::string(raw), 0});
        return out;
    }
    while (pos != std::string_view::npos) {
        std::size_t inner = pos + kOpen.size();
        std::size_t close = raw.find(kClose, inner);
        std::size_t next_open = raw.find(kOpen, inner);
        if (close == std::string_view::npos || (next_open != std::string_view::npos && next_open < close)) {
            throw MalformedEnvelope("<DOCUMENT> at offset " + std::to_string(pos) + " is never closed");
        }
        std::string_view section = raw.substr(inner, close - inner);

        EmbeddedDocument doc;
        if (auto t = section.find(kType); t != std::string_view::npos) {
            std::size_t v = t + kType.size();
            std::size_t e = section.find_first_of("\r\n<", v);
            doc.doc_type = std::string(text::trim(section.substr(v, e == std::string_view::npos ? e : e - v)));
        }
        if (auto t = section.find(kTextOpen); t != std::string_view::npos) {
            std::size_t b = t + kTextOpen.size();
            std::size_t e = section.find(kTextClose, b);
            if (e == std::string_view::npos) {
                throw MalformedEnvelope("<TEXT> section of document '" + doc.doc_type + "' is never closed");
            }
            doc.body = std::string(section.substr(b, e - b));
            doc.body_offset = inner + b;
        } else {
            doc.body = std::string(section);
            doc.body_offset = inner;
        }
        out.push_back(std::move(doc));
        pos = raw.find(kOpen, close + kClose.size());
    }
    return out;
}

const EmbeddedDocument& primary_document(const std::vector<EmbeddedDocument>& docs) {
    if (docs.empty()) throw Error("no embedded documents");
    for (const auto& d : docs) {
        if (d.doc_type == "10-Q" || d.doc_type == "10-Q/A") return d;
    }
    return docs.front();
}

namespace {

constexpr std::array<std::string_view, 44> kHtmlTags = {
    "a",     "b",     "body",  "br",     "center", "dd",   "div",   "dl",    "dt",    "em",    "font",
    "h1",    "h2",    "h3",    "h4",     "h5",     "h6",   "head",  "hr",    "html",  "i",     "img",
    "li",    "link",  "meta",  "ol",     "p",      "pre",  "script", "small", "span",  "strong", "style",
    "sub",   "sup",   "table", "tbody",  "td",     "th",   "thead", "title", "tr",    "u",     "ul"};

bool is_known_tag(std::string_view name) {
    return std::find(kHtmlTags.begin(), kHtmlTags.end(), name) != kHtmlTags.end();
}

}  // namespace

double tag_density_per_kb(std::string_view body) {
    if (body.empty()) return 0.0;
    std::size_t count = 0;
    std::string name;
    for (std::size_t i = 0; i + 1 < body.size(); ++i) {
        if (body[i] != '<') continue;
        std::size_t j = i + 1;
        if (body[j] == '/') ++j;
        name.clear();
        while (j < body.size() && std::isalnum(static_cast<unsigned char>(body[j])) && name.size() < 8) {
            name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(body[j]))));
            ++j;
        }
        if (name.empty() || j >= body.size()) continue;
        char term = body[j];
        if ((term == '>' || term == '/' || std::isspace(static_cast<unsigned char>(term))) && is_known_tag(name)) {
            ++count;
        }
    }
    return static_cast<double>(count) / (static_cast<double>(body.size()) / 1024.0);
}

bool has_html_doctype(std::string_view body) {
    return text::ifind(body, "<!doctype html") != std::string_view::npos;
}

FilingFormat classify_format(std::string_view body, double threshold_per_kb) {
    if (has_html_doctype(body)) return FilingFormat::Html;
    return tag_density_per_kb(body) > threshold_per_kb ? FilingFormat::Html : FilingFormat::PlainText;
}

std::string decode_body(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    std::size_t code_points = 0;
    std::size_t replacements = 0;
    std::size_t i = 0;
    while (i < bytes.size()) {
        std::size_t len = 0;
        char32_t cp = text::decode_utf8_at(bytes, i, len);
        ++code_points;
        if (cp == text::kReplacement) {
            ++replacements;
            text::append_utf8(out, text::kReplacement);
        } else {
            out.append(bytes.substr(i, len));
        }
        i += len;
    }
    if (code_points > 0 && replacements * 100 > code_points) {
        std::string latin;
        latin.reserve(bytes.size() + bytes.size() / 8);
        for (unsigned char c : bytes) text::append_utf8(latin, c);
        return latin;
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int k = 0; k < len; ++k) {
        hex.push_back(kHex[digest[k] >> 4]);
        hex.push_back(kHex[digest[k] & 0xF]);
    }
    return hex;
}

RateLimiter::RateLimiter(const Clock& clock, Clock::duration min_interval)
    : clock_(clock), interval_(min_interval) {}

Clock::time_point RateLimiter::acquire() {
    std::lock_guard lock(mutex_);
    auto now = clock_.now();
    if (has_last_ && now < last_ + interval_) {
        clock_.sleep_until(last_ + interval_);
        now = std::max(clock_.now(), last_ + interval_);
    }
    last_ = now;
    has_last_ = true;
    return now;
}

std::string edgar_archive_path(std::string_view accession_id, std::string_view cik) {
    auto digits = normalize_accession(accession_id);
    std::string filer(cik.empty() ? std::string_view(digits).substr(0, 10) : cik);
    filer.erase(0, std::min(filer.find_first_not_of('0'), filer.size() - 1));
    return "/Archives/edgar/data/" + filer + "/" + dashed_accession(digits) + ".txt";
}

fs::path cache_path(const fs::path& cache_dir, std::string_view accession_id) {
    return cache_dir / (normalize_accession(accession_id) + ".raw");
}

Fetcher::Fetcher(fs::path cache_dir, std::shared_ptr<HttpTransport> transport, std::shared_ptr<RateLimiter> limiter)
    : cache_dir_(std::move(cache_dir)), transport_(std::move(transport)), limiter_(std::move(limiter)) {}

RawFiling Fetcher::fetch(std::string_view accession_id, std::string_view cik) {
    RawFiling filing;
    filing.accession_id = normalize_accession(accession_id);
    filing.cik = cik.empty() ? filing.accession_id.substr(0, 10) : std::string(cik);

    auto path = cache_path(cache_dir_, filing.accession_id);
    auto sidecar = path;
    sidecar += ".sha256";
    if (fs::exists(path)) {
        filing.bytes = read_file(path);
        if (fs::exists(sidecar)) {
            auto expected = std::string(text::trim(read_file(sidecar)));
            if (expected != sha256_hex(filing.bytes)) {
                throw CacheCorrupt("checksum mismatch for cached " + path.string());
            }
        }
        filing.source = Source::LocalFile;
        return filing;
    }

    if (!transport_) throw NetworkError("no transport configured and " + path.string() + " not cached");
    if (limiter_) limiter_->acquire();
    auto resp = transport_->get(edgar_archive_path(filing.accession_id, cik));
    if (resp.status == 404) throw NotFound("EDGAR has no filing " + dashed_accession(filing.accession_id));
    if (resp.status != 200) {
        throw NetworkError("EDGAR returned HTTP " + std::to_string(resp.status) + " for " +
                           dashed_accession(filing.accession_id));
    }
    if (resp.body.empty()) throw NetworkError("empty response for " + dashed_accession(filing.accession_id));

    fs::create_directories(cache_dir_);
    write_file_atomic(path, resp.body);
    write_file_atomic(sidecar, sha256_hex(resp.body) + "\n");
    filing.bytes = std::move(resp.body);
    filing.source = Source::Remote;
    return filing;
}

RawFiling fetch_filing(std::string_view accession_id, const fs::path& cache_dir) {
    static auto limiter = std::make_shared<RateLimiter>(steady_clock(), kDefaultRequestInterval);
    const char* ua = std::getenv(kUserAgentEnv);
    Fetcher fetcher(cache_dir, make_http_transport(kEdgarBaseUrl, ua && *ua ? ua : kDefaultUserAgent), limiter);
    return fetcher.fetch(accession_id);
}

RawFiling read_local_filing(const fs::path& path) {
    RawFiling filing;
    filing.bytes = read_file(path);
    if (filing.bytes.empty()) throw IoError("empty filing " + path.string());
    auto stem = path.stem().string();
    try {
        filing.accession_id = normalize_accession(stem);
        filing.cik = filing.accession_id.substr(0, 10);
    } catch (const InvalidAccession&) {
        filing.accession_id = stem;
    }
    filing.source = Source::LocalFile;
    return filing;
}

}  // namespace tenq::ingest
