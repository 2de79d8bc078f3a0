#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mteval::text {

// Unicode whitespace per the White_Space property (the set is small and
// stable; hardcoded here to avoid an ICU dependency).
bool is_space(char32_t c);

// Decodes UTF-8; invalid sequences yield U+FFFD one byte at a time so the
// result is always defined and deterministic.
std::u32string decode_utf8(std::string_view s);

std::string encode_utf8(std::u32string_view s);

// Splits on runs of Unicode whitespace. Empty input gives an empty vector.
std::vector<std::string> words(std::string_view s);

std::size_t word_count(std::string_view s);

// All non-whitespace code points, in order (whitespace removed entirely).
std::u32string strip_spaces(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_valid_utf8(std::string_view s);

} // namespace mteval::text
