#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace flowforge {

// 64-bit FNV-1a over raw bytes.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Lowercase hex SHA-256 digest (64 chars).
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

// First 16 hex chars of the SHA-256 digest; the engine's content id form.
[[nodiscard]] inline std::string content_id(std::string_view bytes) {
  return sha256_hex(bytes).substr(0, 16);
}

} // namespace flowforge
