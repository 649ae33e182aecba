#include "restcipher/arrangement.hpp"

#include <algorithm>
#include <array>

#include "restcipher/error.hpp"

namespace restcipher {
namespace {

constexpr std::string_view kSmall = "abcdefghijklmnopqrstuvwxyz";
constexpr std::string_view kCapital = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
constexpr std::string_view kDigit = "0123456789";
// Printable ASCII that is not alphanumeric, in code point order (space first).
constexpr std::string_view kSpecial = " !\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

std::array<Arrangement, kArrangementCount> build_arrangements() {
  std::array<Arrangement, kArrangementCount> table;
  std::size_t next = 0;
  // Blocks by subset size; subsets in class-rank order; every permutation of a
  // subset in lexicographic order before moving to the next subset.
  for (int size = 1; size <= 4; ++size) {
    std::vector<std::vector<int>> subsets;
    std::vector<int> pick;
    auto recurse = [&](auto&& self, int from) -> void {
      if (static_cast<int>(pick.size()) == size) {
        subsets.push_back(pick);
        return;
      }
      for (int c = from; c < 4; ++c) {
        pick.push_back(c);
        self(self, c + 1);
        pick.pop_back();
      }
    };
    recurse(recurse, 0);
    for (auto subset : subsets) {
      do {
        Arrangement arrangement;
        for (int c : subset) arrangement.push_back(static_cast<CharClass>(c));
        table[next++] = std::move(arrangement);
      } while (std::next_permutation(subset.begin(), subset.end()));
    }
  }
  // Entry 14 must be [digit, capital, small].
  std::swap(table[14], table[21]);
  return table;
}

const std::array<Arrangement, kArrangementCount>& arrangements() {
  static const auto table = build_arrangements();
  return table;
}

}  // namespace

const Arrangement& arrangement_for(std::uint32_t symbol_type) {
  if (symbol_type >= kArrangementCount) {
    throw Error(Errc::OutOfRange, "symbol_type must be in 0..63", 5);
  }
  return arrangements()[symbol_type];
}

std::string_view class_characters(CharClass cls) {
  switch (cls) {
    case CharClass::Small: return kSmall;
    case CharClass::Capital: return kCapital;
    case CharClass::Digit: return kDigit;
    case CharClass::Special: return kSpecial;
  }
  return {};
}

std::string charset_for(std::uint32_t symbol_type) {
  std::string out;
  for (CharClass cls : arrangement_for(symbol_type)) out += class_characters(cls);
  return out;
}

std::size_t charset_size(std::uint32_t symbol_type) {
  std::size_t n = 0;
  for (CharClass cls : arrangement_for(symbol_type)) n += class_characters(cls).size();
  return n;
}

}  // namespace restcipher
