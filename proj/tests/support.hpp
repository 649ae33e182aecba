#pragma once

// Shared by the property suite and the acceptance binary.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "restcipher/arrangement.hpp"
#include "restcipher/corpus.hpp"
#include "restcipher/key.hpp"

namespace support {

// Second derivation of the symbol table, written against the key definition
// only: arrangement order from std::next_permutation, headers from closed
// forms, groups reversed by index arithmetic.
inline std::vector<std::pair<char, std::uint64_t>> oracle_symbol_table(const restcipher::TenElementKey& k) {
  static const std::string classes[4] = {
      "abcdefghijklmnopqrstuvwxyz", "ABCDEFGHIJKLMNOPQRSTUVWXYZ", "0123456789",
      " !\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"};
  std::vector<std::vector<int>> table;
  for (int size = 1; size <= 4; ++size) {
    // Subsets of the given size in lexicographic order of their members.
    std::vector<std::vector<int>> subsets;
    for (int mask = 0; mask < 16; ++mask) {
      if (__builtin_popcount(mask) != size) continue;
      std::vector<int> s;
      for (int i = 0; i < 4; ++i) {
        if (mask & (1 << i)) s.push_back(i);
      }
      subsets.push_back(s);
    }
    std::sort(subsets.begin(), subsets.end());
    for (auto s : subsets) {
      do {
        table.push_back(s);
      } while (std::next_permutation(s.begin(), s.end()));
    }
  }
  std::swap(table[14], table[21]);

  std::string chars;
  for (int c : table[k.symbol_type]) chars += classes[c];
  const std::size_t n = chars.size();
  std::vector<char> placed(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pos = i;
    if (k.reverse) {
      const std::size_t lo = i / k.group_size * k.group_size;
      const std::size_t hi = std::min<std::size_t>(lo + k.group_size, n);
      pos = lo + (hi - 1 - i);
    }
    placed[pos] = chars[i];
  }
  std::vector<std::pair<char, std::uint64_t>> out;
  std::set<std::uint64_t> used;
  std::uint64_t lo_code = 1;
  for (std::uint32_t i = 1; i < k.final_sum; ++i) lo_code *= 10;
  const std::uint64_t hi_code = lo_code * 10;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::uint64_t r = pos / k.cols, c = pos % k.cols;
    const std::uint64_t rh = (k.start_with ? k.cols : 0) + (k.row_rev ? k.rows - r : r + 1);
    const std::uint64_t ch = (k.start_with ? 0 : k.rows) + (k.col_rev ? k.cols - c : c + 1);
    std::uint64_t a = 1, b = 1;
    for (std::uint32_t p = 0; p < k.power; ++p) {
      a *= rh;
      b *= ch;
    }
    std::uint64_t code = a + b;
    while (code < lo_code) code *= 10;
    while (code >= hi_code) code /= 10;
    while (used.count(code)) {
      ++code;
      if (code >= hi_code) code = lo_code;
    }
    used.insert(code);
    out.emplace_back(placed[pos], code);
  }
  return out;
}

inline bool has_letter(const std::string& charset) {
  return std::any_of(charset.begin(), charset.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

// Documents over exactly the characters a key can encode.
inline restcipher::CorpusOptions options_for(const restcipher::TenElementKey& key) {
  restcipher::CorpusOptions o;
  o.charset = restcipher::charset_for(key.symbol_type);
  o.xml_names = false;
  return o;
}

inline restcipher::TenElementKey random_key(std::mt19937_64& rng) {
  return restcipher::generate_key(restcipher::KeyBounds{}, rng);
}

}  // namespace support
