#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace prefpol {

// CRC-32 (IEEE 802.3 polynomial), used as the container trailing checksum.
std::uint32_t crc32(const void* data, std::size_t len,
                    std::uint32_t seed = 0);

// FNV-1a 64-bit, used for config hashes and the mock server's frame index.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

std::string to_hex(std::uint64_t v);

}  // namespace prefpol
