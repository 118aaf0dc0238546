#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tenq::html {

struct Token {
    enum class Type { Text, StartTag, EndTag, Comment, Declaration };

    Type type = Type::Text;
    std::size_t begin = 0;  // raw byte range of the whole token
    std::size_t end = 0;
    std::string name;       // lowercase, tags only
    std::vector<std::pair<std::string, std::string>> attrs;  // names lowercase, values entity-decoded
    bool self_closing = false;

    const std::string* attr(std::string_view key) const;
};

// Error-tolerant tokenizer: unterminated constructs run to end of input, stray
// '<' characters are text, and the contents of script/style are skipped as a
// single Text token.
class Tokenizer {
public:
    explicit Tokenizer(std::string_view input) : in_(input) {}

    bool next(Token& tok);

private:
    void read_tag(Token& tok, bool closing);

    std::string_view in_;
    std::size_t pos_ = 0;
    std::string raw_until_;  // set after <script>/<style>
};

// Decodes one character reference starting at in[i] == '&'. Returns false when
// the text is not a recognizable reference. On success, appends the UTF-8 result
// to out and sets consumed.
bool decode_entity(std::string_view in, std::size_t i, std::string& out, std::size_t& consumed);

std::string decode_entities(std::string_view in);

}  // namespace tenq::html
