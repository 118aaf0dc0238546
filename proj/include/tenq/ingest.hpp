#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "tenq/clock.hpp"

namespace tenq::ingest {

enum class Source { Remote, LocalFile };

struct RawFiling {
    std::string accession_id;  // dashes removed
    std::string period;        // YYYY-QQ when known
    std::string cik;
    std::string bytes;
    Source source = Source::LocalFile;
};

enum class FilingFormat { Html, PlainText };

const char* to_string(FilingFormat f);
FilingFormat format_from_string(std::string_view s);

struct EmbeddedDocument {
    std::string doc_type;
    std::string body;
    std::size_t body_offset = 0;  // where body starts inside the raw input
};

// Validates an EDGAR accession number (18 digits, dashes optional) and returns
// the digits only. Throws InvalidAccession.
std::string normalize_accession(std::string_view accession_id);

// Re-inserts the canonical dashes: 0000320193-19-000066.
std::string dashed_accession(std::string_view accession_id);

// Splits an EDGAR SGML submission into its <DOCUMENT> sections. Input without
// any envelope comes back as a single "RAW" entry.
std::vector<EmbeddedDocument> strip_sgml_envelope(std::string_view raw);

// First entry typed 10-Q (or 10-Q/A), else the first entry.
const EmbeddedDocument& primary_document(const std::vector<EmbeddedDocument>& docs);

inline constexpr double kDefaultTagDensityPerKb = 1.0;

// Recognized HTML tag openings per kilobyte of body.
double tag_density_per_kb(std::string_view body);
bool has_html_doctype(std::string_view body);
FilingFormat classify_format(std::string_view body, double threshold_per_kb = kDefaultTagDensityPerKb);

// Lossy UTF-8 decode; falls back to Latin-1 when more than 1% of decoded code
// points are replacement characters.
std::string decode_body(std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

// Shared token source enforcing a minimum spacing between remote requests.
class RateLimiter {
public:
    RateLimiter(const Clock& clock, Clock::duration min_interval);

    // Blocks until a request may be issued and returns the issue time.
    Clock::time_point acquire();
    Clock::duration min_interval() const { return interval_; }

private:
    const Clock& clock_;
    Clock::duration interval_;
    std::mutex mutex_;
    bool has_last_ = false;
    Clock::time_point last_{};
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    // Throws NetworkError on transport failure.
    virtual HttpResponse get(const std::string& path) = 0;
};

// cpp-httplib backed transport. base_url like "https://www.sec.gov".
std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   const std::string& user_agent);

inline constexpr std::chrono::milliseconds kDefaultRequestInterval{150};
inline constexpr const char* kEdgarBaseUrl = "https://www.sec.gov";
inline constexpr const char* kUserAgentEnv = "TENQ_USER_AGENT";
inline constexpr const char* kDefaultUserAgent = "tenq research tool admin@example.org";

// EDGAR archive path for a full submission text file. When cik is empty the
// filer-agent prefix of the accession number is used.
std::string edgar_archive_path(std::string_view accession_id, std::string_view cik = {});

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, std::string_view accession_id);

class Fetcher {
public:
    Fetcher(std::filesystem::path cache_dir, std::shared_ptr<HttpTransport> transport,
            std::shared_ptr<RateLimiter> limiter);

    // Cache hit returns Source::LocalFile without touching the transport.
    RawFiling fetch(std::string_view accession_id, std::string_view cik = {});

private:
    std::filesystem::path cache_dir_;
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<RateLimiter> limiter_;
};

RawFiling fetch_filing(std::string_view accession_id, const std::filesystem::path& cache_dir);

// Local corpus file; accession id taken from the file stem when it parses as one.
RawFiling read_local_filing(const std::filesystem::path& path);

}  // namespace tenq::ingest
