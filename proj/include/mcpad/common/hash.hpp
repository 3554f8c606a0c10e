#pragma once

#include <span>
#include <string>
#include <string_view>

namespace mcpad {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_hex(std::span<const unsigned char> data);

/// SHA-256 of a file's bytes; throws IoError when unreadable.
std::string sha256_file(const std::string& path);

}  // namespace mcpad
