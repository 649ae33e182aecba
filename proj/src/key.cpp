#include "restcipher/key.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "restcipher/arrangement.hpp"
#include "restcipher/error.hpp"
#include "restcipher/numeric.hpp"

namespace restcipher {
namespace {

constexpr const char* kElementNames[10] = {
    "rows", "cols", "start_with", "row_rev", "col_rev",
    "symbol_type", "group_size", "reverse", "final_sum", "power"};

void require(bool ok, std::size_t element, const std::string& why) {
  if (!ok) {
    throw Error(Errc::OutOfRange,
                std::string(kElementNames[element]) + " (key[" + std::to_string(element) + "]) " + why,
                static_cast<int>(element));
  }
}

bool is_bit(std::int64_t v) { return v == 0 || v == 1; }

// Largest rh^power + ch^power over every header pair, or nullopt on overflow.
std::optional<std::uint64_t> max_cell_value(const TenElementKey& k) {
  const std::uint64_t max_rh = k.start_with ? std::uint64_t{k.cols} + k.rows : k.rows;
  const std::uint64_t max_ch = k.start_with ? k.cols : std::uint64_t{k.rows} + k.cols;
  auto a = checked_pow(max_rh, k.power);
  auto b = checked_pow(max_ch, k.power);
  if (!a || !b) return std::nullopt;
  return checked_add(*a, *b);
}

// Smallest width w with 9*10^(w-1) >= n.
unsigned code_space_width(std::size_t n) {
  unsigned w = 1;
  std::uint64_t capacity = 9;
  while (capacity < n) {
    capacity *= 10;
    ++w;
  }
  return w;
}

}  // namespace

std::array<std::int64_t, 10> TenElementKey::elements() const {
  return {rows, cols, start_with, row_rev, col_rev, symbol_type, group_size, reverse, final_sum, power};
}

std::uint32_t minimum_final_sum(const TenElementKey& key) {
  auto max_value = max_cell_value(key);
  if (!max_value) return kMaxFinalSum + 1;
  const unsigned by_value = decimal_digits(*max_value);
  const unsigned by_space = code_space_width(charset_size(key.symbol_type));
  return std::max(by_value, by_space);
}

TenElementKey validate_key(const std::array<std::int64_t, 10>& c) {
  require(c[0] >= 1 && c[0] <= kMaxRowsOrCols, 0, "must be in 1..1024");
  require(c[1] >= 1 && c[1] <= kMaxRowsOrCols, 1, "must be in 1..1024");
  require(is_bit(c[2]), 2, "must be 0 or 1");
  require(is_bit(c[3]), 3, "must be 0 or 1");
  require(is_bit(c[4]), 4, "must be 0 or 1");
  require(c[5] >= 0 && c[5] < kArrangementCount, 5, "must be in 0..63");
  require(c[6] >= 1 && c[6] <= c[0] * c[1], 6, "must be in 1..rows*cols");
  require(is_bit(c[7]), 7, "must be 0 or 1");
  require(c[8] >= 1 && c[8] <= kMaxFinalSum, 8, "must be in 1..18");
  require(c[9] >= 1 && c[9] <= std::numeric_limits<std::uint32_t>::max(), 9, "must be positive");

  TenElementKey key;
  key.rows = static_cast<std::uint32_t>(c[0]);
  key.cols = static_cast<std::uint32_t>(c[1]);
  key.start_with = c[2] == 1;
  key.row_rev = c[3] == 1;
  key.col_rev = c[4] == 1;
  key.symbol_type = static_cast<std::uint32_t>(c[5]);
  key.group_size = static_cast<std::uint32_t>(c[6]);
  key.reverse = c[7] == 1;
  key.final_sum = static_cast<std::uint32_t>(c[8]);
  key.power = static_cast<std::uint32_t>(c[9]);

  const std::size_t chars = charset_size(key.symbol_type);
  const std::uint64_t cells = std::uint64_t{key.rows} * key.cols;
  if (chars > cells) {
    throw Error(Errc::CapacityExceeded, std::to_string(chars) + " characters do not fit " +
                                            std::to_string(cells) + " cells");
  }
  if (code_space_width(chars) > key.final_sum) {
    throw Error(Errc::CapacityExceeded, std::to_string(chars) + " characters exceed the " +
                                            std::to_string(key.final_sum) + "-digit code space");
  }
  auto max_value = max_cell_value(key);
  if (!max_value || decimal_digits(*max_value) > key.final_sum) {
    throw Error(Errc::WidthTooSmall,
                "largest cell value " + (max_value ? std::to_string(*max_value) : std::string("(overflow)")) +
                    " needs more than " + std::to_string(key.final_sum) + " digits");
  }
  return key;
}

std::string serialize_key(const TenElementKey& key) {
  std::string out = "[";
  const auto e = key.elements();
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(e[i]);
  }
  out += ']';
  return out;
}

TenElementKey parse_key(std::string_view text) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw Error(Errc::Malformed, "key must be enclosed in brackets");
  }
  std::array<std::int64_t, 10> values{};
  std::string_view body = text.substr(1, text.size() - 2);
  std::size_t count = 0;
  while (true) {
    const auto comma = body.find(',');
    const std::string_view field = body.substr(0, comma);
    if (count == values.size()) throw Error(Errc::Malformed, "key has more than ten elements");
    if (field.empty() || field.size() > 18 || (field.size() > 1 && field[0] == '0')) {
      throw Error(Errc::Malformed, "bad key element '" + std::string(field) + "'");
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field[0] == '-') {
      throw Error(Errc::Malformed, "bad key element '" + std::string(field) + "'");
    }
    values[count++] = v;
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  if (count != values.size()) {
    throw Error(Errc::Malformed, "key has " + std::to_string(count) + " elements, expected 10");
  }
  return validate_key(values);
}

TenElementKey generate_key(const KeyBounds& bounds, std::mt19937_64& rng) {
  const auto& r = bounds.ranges;
  for (const auto& [lo, hi] : r) {
    if (lo > hi) throw Error(Errc::NoValidKeyInBounds, "empty range in bounds");
  }
  // Cheap feasibility screen: the biggest table must hold the smallest charset.
  const std::int64_t max_rows = std::min<std::int64_t>(r[0].second, kMaxRowsOrCols);
  const std::int64_t max_cols = std::min<std::int64_t>(r[1].second, kMaxRowsOrCols);
  std::size_t smallest_charset = std::numeric_limits<std::size_t>::max();
  for (std::int64_t s = std::max<std::int64_t>(r[5].first, 0); s <= std::min<std::int64_t>(r[5].second, 63); ++s) {
    smallest_charset = std::min(smallest_charset, charset_size(static_cast<std::uint32_t>(s)));
  }
  if (max_rows < 1 || max_cols < 1 || smallest_charset == std::numeric_limits<std::size_t>::max() ||
      static_cast<std::uint64_t>(max_rows * max_cols) < smallest_charset ||
      r[6].first > max_rows * max_cols) {
    throw Error(Errc::NoValidKeyInBounds, "no table in bounds can hold a charset");
  }

  constexpr int kBudget = 10000;
  for (int attempt = 0; attempt < kBudget; ++attempt) {
    std::array<std::int64_t, 10> draw{};
    for (std::size_t i = 0; i < draw.size(); ++i) {
      draw[i] = std::uniform_int_distribution<std::int64_t>(r[i].first, r[i].second)(rng);
    }
    try {
      return validate_key(draw);
    } catch (const Error& e) {
      if (e.code() != Errc::WidthTooSmall && e.code() != Errc::CapacityExceeded) continue;
    }
    // Only the width may be at fault: rebuild with the narrowest passing width.
    TenElementKey probe;
    probe.rows = static_cast<std::uint32_t>(draw[0]);
    probe.cols = static_cast<std::uint32_t>(draw[1]);
    probe.start_with = draw[2] == 1;
    probe.symbol_type = static_cast<std::uint32_t>(draw[5]);
    probe.power = static_cast<std::uint32_t>(draw[9]);
    const std::uint32_t width = minimum_final_sum(probe);
    if (width > kMaxFinalSum || width <= draw[8]) continue;
    draw[8] = width;
    try {
      return validate_key(draw);
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(Errc::NoValidKeyInBounds, "no valid key found within the sampling budget");
}

}  // namespace restcipher
