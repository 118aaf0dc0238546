#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace tenq::text {

inline constexpr char32_t kReplacement = 0xFFFD;
inline constexpr char32_t kNbsp = 0x00A0;

// Decodes one code point at byte offset i. Invalid or truncated sequences
// yield kReplacement with len = 1.
char32_t decode_utf8_at(std::string_view s, std::size_t i, std::size_t& len);
void append_utf8(std::string& out, char32_t cp);
std::size_t utf8_length(std::string_view s);

bool is_ascii_space(char c);
// ASCII whitespace, NBSP and the Unicode space separators used by filers.
bool is_space_cp(char32_t cp);

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Case-insensitive (ASCII) search.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);
bool istarts_with(std::string_view s, std::string_view prefix);

// Collapses every run of whitespace (including NBSP) to a single ASCII space
// and trims both ends.
std::string collapse_whitespace(std::string_view s);

// Lowercases, drops apostrophes, maps every other non-alphanumeric code point
// to a space and collapses. "Management's Discussion & Analysis" becomes
// "managements discussion analysis".
std::string fold_words(std::string_view s);

}  // namespace tenq::text
