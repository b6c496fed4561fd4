#pragma once

#include <string>
#include <string_view>

namespace toc::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool contains_case_insensitive(std::string_view haystack, std::string_view needle);

// Cuts `s` to at most `max_bytes` bytes without splitting a UTF-8 sequence.
std::string_view utf8_prefix_bytes(std::string_view s, std::size_t max_bytes);

// Cuts `s` to at most `max_chars` code points.
std::string_view utf8_prefix_chars(std::string_view s, std::size_t max_chars);
std::size_t utf8_length(std::string_view s);

}  // namespace toc::text
