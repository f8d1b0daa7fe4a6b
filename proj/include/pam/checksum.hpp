#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace pam {

/// SHA-256 of a byte range, lowercase hex.
std::string sha256_hex(std::span<const std::byte> bytes);

/// SHA-256 of a file's contents, lowercase hex. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);

/// First eight bytes of the SHA-256 digest, little-endian.
std::uint64_t digest64(std::span<const std::byte> bytes);

}  // namespace pam
