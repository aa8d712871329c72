#pragma once

#include <cstddef>
#include <cstdint>

namespace floodmr {

// FNV-1a, 64 bit. Used for partition assignment and file checksums; the exact
// byte-for-byte definition matters for cross-run stability:
//   h = 14695981039346656037
//   for each input byte b: h = (h XOR b) * 1099511628211   (mod 2^64)
inline constexpr std::uint64_t kFnv64OffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnv64Prime = 1099511628211ull;

constexpr std::uint64_t fnv1a64(const unsigned char* data, std::size_t len,
                                std::uint64_t state = kFnv64OffsetBasis) {
  for (std::size_t i = 0; i < len; ++i) {
    state ^= data[i];
    state *= kFnv64Prime;
  }
  return state;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t state = kFnv64OffsetBasis) {
  return fnv1a64(static_cast<const unsigned char*>(data), len, state);
}

// Streaming form, for checksumming files chunk by chunk.
struct Fnv1a64 {
  std::uint64_t state = kFnv64OffsetBasis;

  void update(const void* data, std::size_t len) {
    state = fnv1a64(data, len, state);
  }
  std::uint64_t digest() const { return state; }
};

}  // namespace floodmr
