#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mtdata {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

std::string base64_encode(std::string_view bytes);
// Throws DataError on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace mtdata
