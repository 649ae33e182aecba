#include "restcipher/tables.hpp"

#include <algorithm>

#include "restcipher/error.hpp"
#include "restcipher/numeric.hpp"

namespace restcipher {

// ---------------------------------------------------------------------------
// Temporary table

std::optional<TempTable::Position> TempTable::find(char c) const {
  if (c == '\0') return std::nullopt;
  auto it = std::find(cells.begin(), cells.end(), c);
  if (it == cells.end()) return std::nullopt;
  const auto index = static_cast<std::size_t>(it - cells.begin());
  return Position{index / cols, index % cols};
}

TempTable build_tt(const TenElementKey& key) {
  TempTable tt;
  tt.rows = key.rows;
  tt.cols = key.cols;

  // Header numbering starts at 1 on whichever axis start_with selects and
  // continues on the other axis.
  const std::uint32_t row_base = key.start_with ? key.cols : 0;
  const std::uint32_t col_base = key.start_with ? 0 : key.rows;
  tt.row_headers.resize(key.rows);
  for (std::uint32_t r = 0; r < key.rows; ++r) {
    tt.row_headers[r] = row_base + (key.row_rev ? key.rows - r : r + 1);
  }
  tt.col_headers.resize(key.cols);
  for (std::uint32_t c = 0; c < key.cols; ++c) {
    tt.col_headers[c] = col_base + (key.col_rev ? key.cols - c : c + 1);
  }

  const std::string chars = charset_for(key.symbol_type);
  tt.cells.assign(std::size_t{key.rows} * key.cols, '\0');
  std::copy(chars.begin(), chars.end(), tt.cells.begin());
  if (key.reverse) {
    // Groups run over the filled cells only; the last group may be short.
    for (std::size_t lo = 0; lo < chars.size(); lo += key.group_size) {
      const std::size_t hi = std::min(lo + key.group_size, chars.size());
      std::reverse(tt.cells.begin() + static_cast<std::ptrdiff_t>(lo),
                   tt.cells.begin() + static_cast<std::ptrdiff_t>(hi));
    }
  }
  return tt;
}

std::uint64_t cell_value(const TempTable& tt, TempTable::Position cell, std::uint32_t power) {
  const auto rh = checked_pow(tt.row_headers.at(cell.row), power);
  const auto ch = checked_pow(tt.col_headers.at(cell.col), power);
  const auto sum = rh && ch ? checked_add(*rh, *ch) : std::nullopt;
  if (!sum) throw Error(Errc::WidthTooSmall, "cell value overflows 64 bits");
  return *sum;
}

// ---------------------------------------------------------------------------
// Symbol table

std::optional<std::uint64_t> SymbolTable::code(char c) const {
  const auto u = static_cast<unsigned char>(c);
  if (u >= by_char_.size()) return std::nullopt;
  return by_char_[u];
}

std::optional<char> SymbolTable::character(std::uint64_t code) const {
  auto it = by_code_.find(code);
  if (it == by_code_.end()) return std::nullopt;
  return it->second;
}

void SymbolTable::insert(char c, std::uint64_t code) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= by_char_.size() || by_char_[u] || by_code_.count(code)) {
    throw Error(Errc::CodeSpaceExhausted, "duplicate symbol table entry");
  }
  by_char_[u] = code;
  by_code_.emplace(code, c);
  entries_.push_back({c, code});
}

SymbolTable build_st(const TenElementKey& key) {
  const TempTable tt = build_tt(key);
  const std::uint64_t lowest = *pow10_u64(key.final_sum - 1);
  const std::uint64_t highest = *pow10_u64(key.final_sum) - 1;

  SymbolTable st(key.final_sum);
  for (std::size_t r = 0; r < tt.rows; ++r) {
    for (std::size_t c = 0; c < tt.cols; ++c) {
      const char symbol = tt.at(r, c);
      if (symbol == '\0') continue;
      const std::uint64_t value = cell_value(tt, {r, c}, key.power);
      const int diff = static_cast<int>(key.final_sum) - static_cast<int>(decimal_digits(value));
      std::uint64_t code = value;
      if (diff > 0) {
        code *= *pow10_u64(static_cast<unsigned>(diff));
      } else if (diff < 0) {
        code /= *pow10_u64(static_cast<unsigned>(-diff));
      }
      // Collision: step upward, wrapping to the smallest code with a nonzero
      // leading digit.
      const std::uint64_t start = code;
      while (st.has_code(code)) {
        code = code == highest ? lowest : code + 1;
        if (code == start) throw Error(Errc::CodeSpaceExhausted, "symbol code space exhausted");
      }
      st.insert(symbol, code);
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// Tag table

std::string_view kind_name(NonVarKind kind) {
  switch (kind) {
    case NonVarKind::Tag: return "tag";
    case NonVarKind::AttrName: return "attribute-name";
    case NonVarKind::AttrValue: return "attribute-value";
  }
  return "?";
}

std::optional<NonVarKind> kind_from_name(std::string_view name) {
  if (name == "tag") return NonVarKind::Tag;
  if (name == "attribute-name") return NonVarKind::AttrName;
  if (name == "attribute-value") return NonVarKind::AttrValue;
  return std::nullopt;
}

std::optional<std::uint64_t> TagTable::code(std::string_view word) const {
  auto it = by_word_.find(word);
  if (it == by_word_.end()) return std::nullopt;
  return entries_[it->second].code;
}

const std::string* TagTable::word(std::uint64_t code) const {
  auto it = by_code_.find(code);
  if (it == by_code_.end()) return nullptr;
  return &entries_[it->second].word;
}

void TagTable::insert(std::string word, std::uint64_t code, NonVarKind kind) {
  if (code == 0 || by_code_.count(code) || by_word_.count(word)) {
    throw Error(Errc::Corrupt, "tag table entry for '" + word + "' clashes");
  }
  by_word_.emplace(word, entries_.size());
  by_code_.emplace(code, entries_.size());
  entries_.push_back({std::move(word), code, kind});
}

bool operator==(const TagTable& a, const TagTable& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.word != y.word || x.code != y.code || x.kind != y.kind) return false;
  }
  return true;
}

TatContext TatContext::for_count(std::size_t non_vars) {
  // ceil(log10(n + 1)) is the digit count of n for n >= 1.
  return {non_vars, non_vars == 0 ? 0u : decimal_digits(non_vars)};
}

std::uint64_t tat_upsert(TagTable& tat, const TatContext& ctx, std::string_view word, NonVarKind kind,
                         const SymbolTable& st) {
  if (auto existing = tat.code(word)) return *existing;

  unsigned __int128 sum = 0;
  for (char c : word) {
    auto code = st.code(c);
    if (!code) {
      throw Error(Errc::UnsupportedCharacter,
                  "character " + std::to_string(static_cast<int>(static_cast<unsigned char>(c))) +
                      " is not in the symbol table");
    }
    sum += *code;
  }

  const auto modulus = pow10_u64(ctx.digits);
  if (ctx.digits == 0 || !modulus) {
    throw Error(Errc::CodeSpaceExhausted, "tag table width " + std::to_string(ctx.digits) + " unusable");
  }
  const std::size_t taken = static_cast<std::size_t>(std::count_if(
      tat.entries().begin(), tat.entries().end(), [&](const auto& e) { return e.code < *modulus; }));
  if (taken >= *modulus - 1) throw Error(Errc::CodeSpaceExhausted, "tag table code space exhausted");

  const int diff = static_cast<int>(ctx.digits) - static_cast<int>(decimal_digits(sum));
  for (int i = 0; i < diff; ++i) sum *= 10;
  for (int i = 0; i > diff; --i) sum /= 10;
  auto code = static_cast<std::uint64_t>(sum);
  while (code == 0 || tat.has_code(code)) code = (code + 1) % *modulus;

  tat.insert(std::string(word), code, kind);
  return code;
}

}  // namespace restcipher
