#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <regex>
#include <string>

#include "tenq/docmodel.hpp"
#include "tenq/ingest.hpp"
#include "tenq/synthetic.hpp"

namespace testing {

namespace fs = std::filesystem;

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = fs::temp_directory_path() /
                ("tenq-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

// Normalized primary document of a generated filing.
inline tenq::NormalizedDoc normalized(const tenq::eval::SyntheticFiling& f) {
    const auto docs = tenq::ingest::strip_sgml_envelope(f.raw);
    const std::string body = tenq::ingest::decode_body(tenq::ingest::primary_document(docs).body);
    return tenq::normalize(body, tenq::ingest::classify_format(body), f.filing_id);
}

// Keyword oracle for "Item <id>" written against the label grammar directly:
// "item" not preceded by an ASCII letter or digit, optional spaces, the number,
// then for lettered ids "A", "-A" or "(A)", else nothing that would extend the label.
inline bool oracle_has_item(const std::string& text, const std::string& id) {
    const std::string sp = "(?:[ \\t]|\xC2\xA0)*";
    const std::string dash = "(?:-|\xE2\x80\x93|\xE2\x80\x94)";
    std::string digits = id, letter;
    if (!id.empty() && std::isalpha(static_cast<unsigned char>(id.back()))) {
        digits = id.substr(0, id.size() - 1);
        letter = id.substr(id.size() - 1);
    }
    std::string tail;
    if (letter.empty()) {
        tail = "(?![A-Za-z0-9])(?!" + dash + "[A-Za-z](?![A-Za-z0-9]))(?!\\([A-Za-z]\\))";
    } else {
        tail = "(?:" + letter + "(?![A-Za-z0-9])|" + dash + letter + "(?![A-Za-z0-9])|\\(" + letter + "\\))";
    }
    const std::regex re("(?:^|[^A-Za-z0-9])item" + sp + digits + tail, std::regex::icase);
    return std::regex_search(text, re);
}

}  // namespace testing
