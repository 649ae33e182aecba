#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "restcipher/docmodel.hpp"
#include "restcipher/tables.hpp"

namespace restcipher {

enum class WordKind { Closer, Tag, AttrName, AttrValue, Variable, Digest };

std::string_view word_kind_name(WordKind kind);

// Classification by text alone:
//   "0" Closer, "000"+nonzero AttrValue, "00"+nonzero AttrName,
//   "0"+nonzero Tag, nonzero-led digits Variable, lowercase hex digest with
//   at least one letter Digest. Throws Unclassifiable otherwise.
WordKind classify_word(std::string_view word);

bool is_digest_word(std::string_view word);

// Number of leading marker zeros for a word kind (Tag 1, AttrName 2, AttrValue 3).
std::size_t marker_length(WordKind kind);

// access list + space-separated words, e.g. "1, 04 008 0 0".
struct EncryptedMessage {
  std::vector<std::uint32_t> access;
  std::vector<std::string> words;

  std::string serialize() const;
  // Throws MalformedMessage. Runs of spaces between words are tolerated.
  static EncryptedMessage parse(std::string_view text);

  friend bool operator==(const EncryptedMessage&, const EncryptedMessage&) = default;
};

std::string join_words(std::span<const std::string> words);

// Marker + concatenated fixed-width codes. Throws UnsupportedCharacter.
std::string encode_word(std::string_view word, TokenKind kind, const SymbolTable& st);

// Inverse of the code concatenation (marker already stripped).
// Throws MalformedWord / UnknownCode.
std::string decode_codes(std::string_view digits, const SymbolTable& st);

enum class Mode { ST, TAT };

// Tables one key contributes to an encode/decode pass. Several lanes are used
// when different parts of a document are under different keys.
struct CodecLane {
  const SymbolTable* st;
  TagTable* tat;
  TatContext* ctx;
};

inline constexpr std::size_t kOpaqueLane = static_cast<std::size_t>(-1);

// Encodes every token; lane_of_token[i] names the lane for token i (ignored
// for Close). Two passes per lane: new non-variable words are counted before
// any tag-table insertion.
std::vector<std::string> encode_words(const WordStream& stream, std::span<const std::size_t> lane_of_token,
                                      std::span<CodecLane> lanes, Mode mode);

// Decodes words lane by lane; words on kOpaqueLane are skipped and come back
// as nullopt. Closers decode to Close without a lane. Grows tag tables the
// same way encode_words does.
std::vector<std::optional<Token>> decode_words(std::span<const std::string> words,
                                               std::span<const std::size_t> lane_of_word,
                                               std::span<CodecLane> lanes, Mode mode);

EncryptedMessage stbe(const WordStream& stream, const SymbolTable& st, TagTable& tat, TatContext& ctx,
                      std::vector<std::uint32_t> access = {1});
WordStream stbd(const EncryptedMessage& msg, const SymbolTable& st, TagTable& tat, TatContext& ctx);

EncryptedMessage tatbe(const WordStream& stream, const SymbolTable& st, TagTable& tat, TatContext& ctx,
                       std::vector<std::uint32_t> access = {1});
WordStream tatbd(const EncryptedMessage& msg, const SymbolTable& st, TagTable& tat, TatContext& ctx);

// Per-session encoder/decoder state for one key.
struct CodecSession {
  explicit CodecSession(const TenElementKey& key) : key(key), st(build_st(key)) {}

  TenElementKey key;
  SymbolTable st;
  TagTable tat;
  TatContext ctx;

  CodecLane lane() { return {&st, &tat, &ctx}; }
};

}  // namespace restcipher
