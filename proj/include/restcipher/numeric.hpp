#pragma once

#include <cstdint>
#include <optional>

namespace restcipher {

// Decimal digit count; digits(0) == 1.
inline unsigned decimal_digits(unsigned __int128 v) {
  unsigned n = 1;
  while (v >= 10) {
    v /= 10;
    ++n;
  }
  return n;
}

// 10^exp, or nullopt when it does not fit in 64 bits.
inline std::optional<std::uint64_t> pow10_u64(unsigned exp) {
  if (exp > 19) return std::nullopt;
  std::uint64_t v = 1;
  for (unsigned i = 0; i < exp; ++i) v *= 10;
  return v;
}

// base^exp, or nullopt on 64-bit overflow.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && result > UINT64_MAX / base) return std::nullopt;
    result *= base;
    if (result <= 1 && base <= 1) break;  // 0 or 1 stays put
  }
  return result;
}

inline std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > UINT64_MAX - b) return std::nullopt;
  return a + b;
}

}  // namespace restcipher
