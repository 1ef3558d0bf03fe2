#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glyphsmith::unicode {

/// Decodes UTF-8 into scalar values. Throws ParseError on invalid sequences.
std::vector<char32_t> decode(std::string_view utf8);

std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

/// "U+5A92" style label (at least four hex digits, upper case).
std::string codepoint_label(char32_t cp);

/// Parses "U+XXXX" (4 to 6 hex digits). Returns nullopt when malformed or
/// outside the scalar value range.
std::optional<char32_t> parse_codepoint_label(std::string_view text);

bool is_scalar_value(char32_t cp);

}  // namespace glyphsmith::unicode
