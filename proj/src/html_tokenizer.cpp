#include "html_tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "tenq/text_util.hpp"

namespace tenq::html {

const std::string* Token::attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
        if (k == key) return &v;
    }
    return nullptr;
}

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == ':' || c == '_' || c == '.';
}

struct NamedEntity {
    std::string_view name;
    char32_t cp;
};

// Sorted by name for binary search.
constexpr std::array<NamedEntity, 66> kEntities = {{
    {"AMP", '&'},      {"GT", '>'},       {"LT", '<'},       {"QUOT", '"'},     {"acute", 0xB4},
    {"amp", '&'},      {"apos", '\''},    {"bdquo", 0x201E}, {"brvbar", 0xA6},  {"bull", 0x2022},
    {"cent", 0xA2},    {"check", 0x2713}, {"copy", 0xA9},    {"curren", 0xA4},  {"dagger", 0x2020},
    {"deg", 0xB0},     {"divide", 0xF7},  {"emsp", 0x2003},  {"ensp", 0x2002},  {"euro", 0x20AC},
    {"frac12", 0xBD},  {"frac14", 0xBC},  {"frac34", 0xBE},  {"gt", '>'},       {"hellip", 0x2026},
    {"iexcl", 0xA1},   {"iquest", 0xBF},  {"laquo", 0xAB},   {"ldquo", 0x201C}, {"lsaquo", 0x2039},
    {"lsquo", 0x2018}, {"lt", '<'},       {"macr", 0xAF},    {"mdash", 0x2014}, {"micro", 0xB5},
    {"middot", 0xB7},  {"minus", 0x2212}, {"nbsp", 0xA0},    {"ndash", 0x2013}, {"not", 0xAC},
    {"ordf", 0xAA},    {"ordm", 0xBA},    {"para", 0xB6},    {"permil", 0x2030}, {"plusmn", 0xB1},
    {"pound", 0xA3},   {"quot", '"'},     {"raquo", 0xBB},   {"rdquo", 0x201D}, {"reg", 0xAE},
    {"rsaquo", 0x203A}, {"rsquo", 0x2019}, {"sbquo", 0x201A}, {"sect", 0xA7},   {"shy", 0xAD},
    {"sup1", 0xB9},    {"sup2", 0xB2},    {"sup3", 0xB3},    {"thinsp", 0x2009}, {"times", 0xD7},
    {"trade", 0x2122}, {"uml", 0xA8},     {"yen", 0xA5},     {"zwj", 0x200D},   {"zwnj", 0x200C},
    {"zwsp", 0x200B},
}};

// Numeric references in 0x80-0x9F almost always mean Windows-1252 in filings.
constexpr std::array<char32_t, 32> kCp1252 = {
    0x20AC, 0x81,   0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0x8D,   0x017D, 0x8F,   0x90,   0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x9D,   0x017E, 0x0178};

}  // namespace

bool decode_entity(std::string_view in, std::size_t i, std::string& out, std::size_t& consumed) {
    std::size_t j = i + 1;
    if (j >= in.size()) return false;
    if (in[j] == '#') {
        ++j;
        bool hex = j < in.size() && (in[j] == 'x' || in[j] == 'X');
        if (hex) ++j;
        std::size_t digits_begin = j;
        char32_t cp = 0;
        while (j < in.size() && j - digits_begin < 8) {
            char c = in[j];
            int v;
            if (c >= '0' && c <= '9') {
                v = c - '0';
            } else if (hex && c >= 'a' && c <= 'f') {
                v = c - 'a' + 10;
            } else if (hex && c >= 'A' && c <= 'F') {
                v = c - 'A' + 10;
            } else {
                break;
            }
            cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
            ++j;
        }
        if (j == digits_begin) return false;
        if (j < in.size() && in[j] == ';') ++j;
        if (cp >= 0x80 && cp <= 0x9F) cp = kCp1252[cp - 0x80];
        if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = text::kReplacement;
        text::append_utf8(out, cp);
        consumed = j - i;
        return true;
    }
    std::size_t name_begin = j;
    while (j < in.size() && std::isalnum(static_cast<unsigned char>(in[j])) && j - name_begin < 10) ++j;
    if (j == name_begin) return false;
    std::string_view name = in.substr(name_begin, j - name_begin);
    auto it = std::lower_bound(kEntities.begin(), kEntities.end(), name,
                               [](const NamedEntity& e, std::string_view n) { return e.name < n; });
    if (it == kEntities.end() || it->name != name) return false;
    if (j < in.size() && in[j] == ';') ++j;
    text::append_utf8(out, it->cp);
    consumed = j - i;
    return true;
}

std::string decode_entities(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size();) {
        std::size_t consumed = 0;
        if (in[i] == '&' && decode_entity(in, i, out, consumed)) {
            i += consumed;
        } else {
            out.push_back(in[i]);
            ++i;
        }
    }
    return out;
}

void Tokenizer::read_tag(Token& tok, bool closing) {
    std::size_t j = pos_ + (closing ? 2 : 1);
    std::size_t name_begin = j;
    while (j < in_.size() && is_name_char(in_[j])) ++j;
    tok.name = text::to_lower_ascii(in_.substr(name_begin, j - name_begin));

    while (j < in_.size()) {
        char c = in_[j];
        if (c == '>') {
            ++j;
            break;
        }
        if (c == '/' && j + 1 < in_.size() && in_[j + 1] == '>') {
            tok.self_closing = true;
            j += 2;
            break;
        }
        if (text::is_ascii_space(c) || c == '/') {
            ++j;
            continue;
        }
        std::size_t an = j;
        while (j < in_.size() && !text::is_ascii_space(in_[j]) && in_[j] != '=' && in_[j] != '>' &&
               !(in_[j] == '/' && j + 1 < in_.size() && in_[j + 1] == '>'))
            ++j;
        std::string attr_name = text::to_lower_ascii(in_.substr(an, j - an));
        while (j < in_.size() && text::is_ascii_space(in_[j])) ++j;
        std::string value;
        if (j < in_.size() && in_[j] == '=') {
            ++j;
            while (j < in_.size() && text::is_ascii_space(in_[j])) ++j;
            if (j < in_.size() && (in_[j] == '"' || in_[j] == '\'')) {
                char q = in_[j++];
                std::size_t vb = j;
                while (j < in_.size() && in_[j] != q) ++j;
                value = decode_entities(in_.substr(vb, j - vb));
                if (j < in_.size()) ++j;
            } else {
                std::size_t vb = j;
                while (j < in_.size() && !text::is_ascii_space(in_[j]) && in_[j] != '>') ++j;
                value = decode_entities(in_.substr(vb, j - vb));
            }
        }
        if (!closing && !attr_name.empty()) tok.attrs.emplace_back(std::move(attr_name), std::move(value));
    }
    tok.end = j;
    pos_ = j;
}

bool Tokenizer::next(Token& tok) {
    tok = Token{};
    if (pos_ >= in_.size()) return false;
    tok.begin = pos_;

    if (!raw_until_.empty()) {
        std::size_t close = text::ifind(in_, raw_until_, pos_);
        if (close == std::string_view::npos) close = in_.size();
        raw_until_.clear();
        if (close > pos_) {
            tok.type = Token::Type::Text;
            tok.end = close;
            pos_ = close;
            return true;
        }
    }

    if (in_[pos_] == '<' && pos_ + 1 < in_.size()) {
        char c = in_[pos_ + 1];
        if (in_.substr(pos_, 4) == "<!--") {
            std::size_t e = in_.find("-->", pos_ + 4);
            tok.type = Token::Type::Comment;
            tok.end = e == std::string_view::npos ? in_.size() : e + 3;
            pos_ = tok.end;
            return true;
        }
        if (c == '!' || c == '?') {
            std::size_t e = in_.find('>', pos_ + 2);
            tok.type = Token::Type::Declaration;
            tok.end = e == std::string_view::npos ? in_.size() : e + 1;
            pos_ = tok.end;
            return true;
        }
        if (c == '/' && pos_ + 2 < in_.size() && is_alpha(in_[pos_ + 2])) {
            tok.type = Token::Type::EndTag;
            read_tag(tok, true);
            return true;
        }
        if (is_alpha(c)) {
            tok.type = Token::Type::StartTag;
            read_tag(tok, false);
            if (!tok.self_closing && (tok.name == "script" || tok.name == "style")) {
                raw_until_ = "</" + tok.name;
            }
            return true;
        }
    }

    // Text up to the next '<' (a stray '<' is consumed as text).
    std::size_t e = in_.find('<', pos_ + 1);
    tok.type = Token::Type::Text;
    tok.end = e == std::string_view::npos ? in_.size() : e;
    pos_ = tok.end;
    return true;
}

}  // namespace tenq::html
