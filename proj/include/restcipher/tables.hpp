#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "restcipher/arrangement.hpp"
#include "restcipher/key.hpp"

namespace restcipher {

// Key-derived character grid. Cells are stored row-major without the header
// row/column; '\0' marks an empty cell. Built only to derive a SymbolTable.
struct TempTable {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint32_t> row_headers;  // rh per row, top to bottom
  std::vector<std::uint32_t> col_headers;  // ch per column, left to right
  std::vector<char> cells;

  char at(std::size_t row, std::size_t col) const { return cells[row * cols + col]; }

  struct Position {
    std::size_t row;
    std::size_t col;
  };
  std::optional<Position> find(char c) const;
};

TempTable build_tt(const TenElementKey& key);

// rh^power + ch^power for a non-header cell. Cell values of validated keys
// always fit in 64 bits.
std::uint64_t cell_value(const TempTable& tt, TempTable::Position cell, std::uint32_t power);

// Bijection between characters and fixed-width decimal codes.
class SymbolTable {
 public:
  struct Entry {
    char character;
    std::uint64_t code;
  };

  explicit SymbolTable(std::uint32_t width) : width_(width) {}

  std::uint32_t width() const { return width_; }
  std::optional<std::uint64_t> code(char c) const;
  std::optional<char> character(std::uint64_t code) const;
  bool has_code(std::uint64_t code) const { return by_code_.count(code) != 0; }
  std::size_t size() const { return entries_.size(); }
  // Insertion (row-major) order.
  const std::vector<Entry>& entries() const { return entries_; }

  void insert(char c, std::uint64_t code);

 private:
  std::uint32_t width_;
  std::vector<Entry> entries_;
  std::array<std::optional<std::uint64_t>, 128> by_char_{};
  std::unordered_map<std::uint64_t, char> by_code_;
};

SymbolTable build_st(const TenElementKey& key);

enum class NonVarKind { Tag, AttrName, AttrValue };

std::string_view kind_name(NonVarKind kind);
std::optional<NonVarKind> kind_from_name(std::string_view name);

// Non-variable word -> agreed integer, grown in lockstep on both ends.
// Entries are keyed by word text alone; the kind recorded is the kind of the
// first occurrence and only matters for dumps.
class TagTable {
 public:
  struct Entry {
    std::string word;
    std::uint64_t code;
    NonVarKind kind;
  };

  std::optional<std::uint64_t> code(std::string_view word) const;
  const std::string* word(std::uint64_t code) const;
  bool contains(std::string_view word) const { return code(word).has_value(); }
  bool has_code(std::uint64_t code) const { return by_code_.count(code) != 0; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  // Records a fixed assignment (used when reloading persisted state).
  void insert(std::string word, std::uint64_t code, NonVarKind kind);

  friend bool operator==(const TagTable& a, const TagTable& b);

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_word_;
  std::unordered_map<std::uint64_t, std::size_t> by_code_;
};

// Width bookkeeping for new tag-table codes.
struct TatContext {
  std::size_t non_vars = 0;  // entries present + new words in this message
  unsigned digits = 0;       // ceil(log10(non_vars + 1))

  static TatContext for_count(std::size_t non_vars);
};

// Returns the code for `word`, inserting it first if absent.
// Throws CodeSpaceExhausted when every nonzero code of the current width is taken.
std::uint64_t tat_upsert(TagTable& tat, const TatContext& ctx, std::string_view word, NonVarKind kind,
                         const SymbolTable& st);

}  // namespace restcipher
