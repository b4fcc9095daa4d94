#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fovea {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::uint8_t* data, std::size_t n);
std::string sha256_hex(const std::vector<std::uint8_t>& data);
std::string sha256_file(const std::string& path);

} // namespace fovea
