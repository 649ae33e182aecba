#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace restcipher {

enum class CharClass { Small, Capital, Digit, Special };

// Ordered character classes that fill the temporary table.
using Arrangement = std::vector<CharClass>;

inline constexpr std::uint32_t kArrangementCount = 64;

// Fixed lookup: 0 -> [small], 1 -> [capital], 14 -> [digit, capital, small].
// Throws OutOfRange for symbol_type > 63.
const Arrangement& arrangement_for(std::uint32_t symbol_type);

// Characters of one class in table-fill order.
std::string_view class_characters(CharClass cls);

// Concatenation of the classes of arrangement_for(symbol_type).
std::string charset_for(std::uint32_t symbol_type);

std::size_t charset_size(std::uint32_t symbol_type);

inline bool is_printable_ascii(char c) {
  return c >= 0x20 && c <= 0x7e;
}

}  // namespace restcipher
