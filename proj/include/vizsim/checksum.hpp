#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

namespace vizsim {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace vizsim
