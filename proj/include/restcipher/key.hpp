#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>

namespace restcipher {

// The ten-element symmetric key shared by both ends of a conversation.
//
// Everything the cipher needs (temporary table, symbol table) is derived from
// these ten integers, so two parties holding equal keys build equal tables.
struct TenElementKey {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  bool start_with = false;  // true: column headers take 1..cols first
  bool row_rev = false;     // true: row headers count bottom to top
  bool col_rev = false;     // true: column headers count right to left
  std::uint32_t symbol_type = 0;
  std::uint32_t group_size = 1;
  bool reverse = false;
  std::uint32_t final_sum = 1;  // symbol code width in decimal digits
  std::uint32_t power = 1;

  std::array<std::int64_t, 10> elements() const;

  friend bool operator==(const TenElementKey&, const TenElementKey&) = default;
};

inline constexpr std::uint32_t kMaxRowsOrCols = 1024;
inline constexpr std::uint32_t kMaxFinalSum = 18;

// Throws Error{OutOfRange | CapacityExceeded | WidthTooSmall}.
TenElementKey validate_key(const std::array<std::int64_t, 10>& candidate);

// Canonical text form, e.g. "[12,6,1,1,1,14,4,1,3,2]". Digests are computed
// over these exact bytes.
std::string serialize_key(const TenElementKey& key);

// Inverse of serialize_key; rejects whitespace and wrong arity with Malformed.
TenElementKey parse_key(std::string_view text);

// Inclusive per-element ranges for generate_key.
struct KeyBounds {
  using Range = std::pair<std::int64_t, std::int64_t>;
  std::array<Range, 10> ranges{{
      {4, 16},  // rows
      {4, 16},  // cols
      {0, 1},   // start_with
      {0, 1},   // row_rev
      {0, 1},   // col_rev
      {0, 63},  // symbol_type
      {1, 16},  // group_size
      {0, 1},   // reverse
      {1, 6},   // final_sum
      {1, 3},   // power
  }};

  KeyBounds& set(std::size_t element, std::int64_t lo, std::int64_t hi) {
    ranges.at(element) = {lo, hi};
    return *this;
  }
};

// Draws a uniformly random valid key inside `bounds`. A sampled final_sum that
// is too narrow is raised to the smallest width that validates.
TenElementKey generate_key(const KeyBounds& bounds, std::mt19937_64& rng);

// Smallest final_sum for which the key's cell values and charset fit.
std::uint32_t minimum_final_sum(const TenElementKey& key);

}  // namespace restcipher
