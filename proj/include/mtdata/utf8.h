#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtdata::utf8 {

bool is_valid(std::string_view bytes);

// Decodes a valid UTF-8 string into code points.  Returns nullopt on any
// malformed sequence (overlong forms, surrogates, truncation).
std::optional<std::vector<char32_t>> decode(std::string_view bytes);

void append(std::string& out, char32_t cp);

// Strips ASCII/Unicode whitespace at both ends.
std::string_view trim(std::string_view s);

bool is_space(char32_t cp);

}  // namespace mtdata::utf8
