#include "restcipher/codec.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <tuple>

#include "restcipher/error.hpp"

namespace restcipher {
namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_lower_hex(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); }

std::string_view marker_for(TokenKind kind) {
  switch (kind) {
    case TokenKind::Open: return "0";
    case TokenKind::AttrName: return "00";
    case TokenKind::AttrValue: return "000";
    default: return "";
  }
}

NonVarKind non_var_kind(TokenKind kind) {
  switch (kind) {
    case TokenKind::AttrName: return NonVarKind::AttrName;
    case TokenKind::AttrValue: return NonVarKind::AttrValue;
    default: return NonVarKind::Tag;
  }
}

TokenKind token_kind(WordKind kind) {
  switch (kind) {
    case WordKind::Tag: return TokenKind::Open;
    case WordKind::AttrName: return TokenKind::AttrName;
    case WordKind::AttrValue: return TokenKind::AttrValue;
    case WordKind::Closer: return TokenKind::Close;
    default: return TokenKind::Variable;
  }
}

std::optional<std::uint64_t> parse_code(std::string_view digits) {
  if (digits.empty() || digits.size() > 19) return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

CodecLane& lane_at(std::span<CodecLane> lanes, std::size_t index) {
  if (index >= lanes.size()) throw Error(Errc::MissingKey, "no key for lane " + std::to_string(index));
  return lanes[index];
}

WordStream assemble(const std::vector<std::optional<Token>>& tokens) {
  WordStream stream;
  stream.reserve(tokens.size());
  std::size_t depth = 0;
  for (const auto& t : tokens) {
    if (t->kind == TokenKind::Open) ++depth;
    if (t->kind == TokenKind::Close) {
      if (depth == 0) throw Error(Errc::UnbalancedClosers, "closer without an open tag");
      --depth;
    }
    stream.push_back(*t);
  }
  if (depth != 0) throw Error(Errc::UnbalancedClosers, std::to_string(depth) + " tag(s) left open");
  validate_stream(stream);
  return stream;
}

WordStream decode_single(const EncryptedMessage& msg, const SymbolTable& st, TagTable& tat, TatContext& ctx,
                         Mode mode) {
  CodecLane lane{&st, &tat, &ctx};
  const std::vector<std::size_t> lanes(msg.words.size(), 0);
  return assemble(decode_words(msg.words, lanes, std::span<CodecLane>(&lane, 1), mode));
}

EncryptedMessage encode_single(const WordStream& stream, const SymbolTable& st, TagTable& tat, TatContext& ctx,
                               std::vector<std::uint32_t> access, Mode mode) {
  validate_stream(stream);
  CodecLane lane{&st, &tat, &ctx};
  const std::vector<std::size_t> lanes(stream.size(), 0);
  return {std::move(access), encode_words(stream, lanes, std::span<CodecLane>(&lane, 1), mode)};
}

}  // namespace

std::string_view word_kind_name(WordKind kind) {
  switch (kind) {
    case WordKind::Closer: return "Closer";
    case WordKind::Tag: return "Tag";
    case WordKind::AttrName: return "AttrName";
    case WordKind::AttrValue: return "AttrValue";
    case WordKind::Variable: return "Variable";
    case WordKind::Digest: return "Digest";
  }
  return "?";
}

bool is_digest_word(std::string_view word) {
  if (word.size() != 32 && word.size() != 40 && word.size() != 64) return false;
  if (!std::all_of(word.begin(), word.end(), is_lower_hex)) return false;
  return std::any_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'f'; });
}

WordKind classify_word(std::string_view word) {
  if (word == "0") return WordKind::Closer;
  if (all_digits(word)) {
    std::size_t zeros = 0;
    while (zeros < word.size() && word[zeros] == '0') ++zeros;
    if (zeros < word.size()) {
      switch (zeros) {
        case 0: return WordKind::Variable;
        case 1: return WordKind::Tag;
        case 2: return WordKind::AttrName;
        case 3: return WordKind::AttrValue;
        default: break;
      }
    }
  } else if (is_digest_word(word)) {
    return WordKind::Digest;
  }
  throw Error(Errc::Unclassifiable, "cannot classify word '" + std::string(word) + "'");
}

std::size_t marker_length(WordKind kind) {
  switch (kind) {
    case WordKind::Tag: return 1;
    case WordKind::AttrName: return 2;
    case WordKind::AttrValue: return 3;
    default: return 0;
  }
}

std::string join_words(std::span<const std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::string EncryptedMessage::serialize() const {
  std::string out;
  for (std::uint32_t a : access) {
    out += std::to_string(a);
    out += ',';
  }
  if (!access.empty()) out += ' ';
  out += join_words(words);
  return out;
}

EncryptedMessage EncryptedMessage::parse(std::string_view text) {
  EncryptedMessage msg;
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ') {
      ++pos;
      continue;
    }
    const auto end = std::min(text.find(' ', pos), text.size());
    parts.push_back(text.substr(pos, end - pos));
    pos = end;
  }
  if (parts.empty()) throw Error(Errc::MalformedMessage, "empty message");

  std::size_t first_word = 0;
  if (parts.front().back() == ',') {
    first_word = 1;
    std::string_view list = parts.front();
    while (!list.empty()) {
      const auto comma = list.find(',');
      const auto field = list.substr(0, comma);
      auto ordinal = parse_code(field);
      if (!all_digits(field) || !ordinal || *ordinal == 0 || *ordinal > UINT32_MAX) {
        throw Error(Errc::MalformedMessage, "bad access list '" + std::string(parts.front()) + "'");
      }
      msg.access.push_back(static_cast<std::uint32_t>(*ordinal));
      list.remove_prefix(comma + 1);
    }
  }
  if (first_word == parts.size()) throw Error(Errc::MalformedMessage, "message has no body");
  for (std::size_t i = first_word; i < parts.size(); ++i) {
    if (parts[i].find(',') != std::string_view::npos) {
      throw Error(Errc::MalformedMessage, "stray comma in word '" + std::string(parts[i]) + "'");
    }
    msg.words.emplace_back(parts[i]);
  }
  return msg;
}

std::string encode_word(std::string_view word, TokenKind kind, const SymbolTable& st) {
  if (word.empty()) throw Error(Errc::MalformedWord, "cannot encode an empty word");
  std::string out(marker_for(kind));
  for (char c : word) {
    auto code = st.code(c);
    if (!code) {
      throw Error(Errc::UnsupportedCharacter,
                  "character " + std::to_string(static_cast<int>(static_cast<unsigned char>(c))) +
                      " is not in the symbol table");
    }
    out += std::to_string(*code);
  }
  return out;
}

std::string decode_codes(std::string_view digits, const SymbolTable& st) {
  const std::size_t width = st.width();
  if (digits.empty() || digits.size() % width != 0) {
    throw Error(Errc::MalformedWord, "length " + std::to_string(digits.size()) + " is not a multiple of " +
                                         std::to_string(width));
  }
  std::string out;
  out.reserve(digits.size() / width);
  for (std::size_t i = 0; i < digits.size(); i += width) {
    const auto slice = digits.substr(i, width);
    auto code = parse_code(slice);
    auto c = code ? st.character(*code) : std::nullopt;
    if (!c) throw Error(Errc::UnknownCode, "no symbol for code " + std::string(slice));
    out += *c;
  }
  return out;
}

namespace {

// Runs f; on any exception every lane's tag table and context are put back as
// they were, so a refused message leaves the session usable.
template <class F>
auto with_rollback(std::span<CodecLane> lanes, F&& f) {
  std::vector<std::optional<std::pair<TagTable, TatContext>>> saved;
  saved.reserve(lanes.size());
  for (const auto& lane : lanes) {
    saved.push_back(lane.tat ? std::optional(std::make_pair(*lane.tat, *lane.ctx)) : std::nullopt);
  }
  try {
    return f();
  } catch (...) {
    for (std::size_t l = 0; l < lanes.size(); ++l) {
      if (saved[l]) std::tie(*lanes[l].tat, *lanes[l].ctx) = std::move(*saved[l]);
    }
    throw;
  }
}

std::vector<std::string> encode_words_once(const WordStream& stream, std::span<const std::size_t> lane_of_token,
                                           std::span<CodecLane> lanes, Mode mode) {
  if (lane_of_token.size() != stream.size()) throw Error(Errc::MissingKey, "lane map does not cover the stream");

  // Pass 1: words each lane has not seen before this message.
  std::vector<std::set<std::string, std::less<>>> fresh(lanes.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Token& t = stream[i];
    if (!is_non_variable(t.kind)) continue;
    CodecLane& lane = lane_at(lanes, lane_of_token[i]);
    if (!lane.tat->contains(t.text)) fresh[lane_of_token[i]].insert(t.text);
  }
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    if (lanes[l].tat) *lanes[l].ctx = TatContext::for_count(lanes[l].tat->size() + fresh[l].size());
  }

  // Pass 2.
  std::vector<std::string> words;
  words.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Token& t = stream[i];
    if (t.kind == TokenKind::Close) {
      words.emplace_back("0");
      continue;
    }
    const std::size_t l = lane_of_token[i];
    CodecLane& lane = lane_at(lanes, l);
    if (t.kind == TokenKind::Variable) {
      words.push_back(encode_word(t.text, t.kind, *lane.st));
      continue;
    }
    const bool known = !fresh[l].count(t.text);
    if (mode == Mode::TAT && known) {
      words.push_back(std::string(marker_for(t.kind)) + std::to_string(*lane.tat->code(t.text)));
      continue;
    }
    std::string word = encode_word(t.text, t.kind, *lane.st);
    if (mode == Mode::TAT) {
      // A receiver resolves a marker word through its tag table first, so the
      // per-character form must not spell a code the table already held.
      const auto stripped = parse_code(std::string_view(word).substr(marker_for(t.kind).size()));
      const std::string* holder = stripped ? lane.tat->word(*stripped) : nullptr;
      if (holder && !fresh[l].count(*holder)) {
        throw Error(Errc::AmbiguousEncoding, "encoding of '" + t.text + "' collides with tag table code " +
                                                 std::to_string(*stripped));
      }
    }
    tat_upsert(*lane.tat, *lane.ctx, t.text, non_var_kind(t.kind), *lane.st);
    words.push_back(std::move(word));
  }
  return words;
}

}  // namespace

std::vector<std::string> encode_words(const WordStream& stream, std::span<const std::size_t> lane_of_token,
                                      std::span<CodecLane> lanes, Mode mode) {
  return with_rollback(lanes, [&] { return encode_words_once(stream, lane_of_token, lanes, mode); });
}

namespace {

std::vector<std::optional<Token>> decode_words_once(std::span<const std::string> words,
                                                    std::span<const std::size_t> lane_of_word,
                                                    std::span<CodecLane> lanes, Mode mode) {
  if (lane_of_word.size() != words.size()) throw Error(Errc::MissingKey, "lane map does not cover the message");

  struct Pending {
    WordKind kind;
    std::string text;
    bool per_character = false;  // decoded through the symbol table
  };
  std::vector<std::optional<Pending>> pending(words.size());
  std::vector<std::set<std::string, std::less<>>> fresh(lanes.size());

  // Pass 1: resolve every owned word against the tables as they stood before
  // this message, and collect the words that are new to each lane.
  for (std::size_t i = 0; i < words.size(); ++i) {
    const WordKind kind = classify_word(words[i]);
    if (kind == WordKind::Digest) throw Error(Errc::MalformedWord, "digest word at position " + std::to_string(i));
    if (kind == WordKind::Closer) {
      pending[i] = Pending{kind, {}, false};
      continue;
    }
    if (lane_of_word[i] == kOpaqueLane) continue;
    CodecLane& lane = lane_at(lanes, lane_of_word[i]);
    const std::string_view body = std::string_view(words[i]).substr(marker_length(kind));
    if (kind == WordKind::Variable) {
      pending[i] = Pending{kind, decode_codes(body, *lane.st), true};
      continue;
    }
    if (mode == Mode::TAT) {
      auto code = parse_code(body);
      if (const std::string* known = code ? lane.tat->word(*code) : nullptr) {
        pending[i] = Pending{kind, *known, false};
        continue;
      }
      if (body.size() % lane.st->width() != 0) {
        throw Error(Errc::UnknownTatCode, "no tag table entry for '" + words[i] + "'");
      }
    }
    std::string text = decode_codes(body, *lane.st);
    if (!lane.tat->contains(text)) fresh[lane_of_word[i]].insert(text);
    pending[i] = Pending{kind, std::move(text), true};
  }
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    if (lanes[l].tat) *lanes[l].ctx = TatContext::for_count(lanes[l].tat->size() + fresh[l].size());
  }

  // Pass 2: grow the tag tables in message order.
  std::vector<std::optional<Token>> out(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!pending[i]) continue;
    Pending& p = *pending[i];
    const TokenKind tk = token_kind(p.kind);
    if (p.per_character && is_non_variable(tk)) {
      CodecLane& lane = lanes[lane_of_word[i]];
      tat_upsert(*lane.tat, *lane.ctx, p.text, non_var_kind(tk), *lane.st);
    }
    out[i] = Token{tk, std::move(p.text)};
  }
  return out;
}

}  // namespace

std::vector<std::optional<Token>> decode_words(std::span<const std::string> words,
                                               std::span<const std::size_t> lane_of_word,
                                               std::span<CodecLane> lanes, Mode mode) {
  return with_rollback(lanes, [&] { return decode_words_once(words, lane_of_word, lanes, mode); });
}

EncryptedMessage stbe(const WordStream& stream, const SymbolTable& st, TagTable& tat, TatContext& ctx,
                      std::vector<std::uint32_t> access) {
  return encode_single(stream, st, tat, ctx, std::move(access), Mode::ST);
}

WordStream stbd(const EncryptedMessage& msg, const SymbolTable& st, TagTable& tat, TatContext& ctx) {
  return decode_single(msg, st, tat, ctx, Mode::ST);
}

EncryptedMessage tatbe(const WordStream& stream, const SymbolTable& st, TagTable& tat, TatContext& ctx,
                       std::vector<std::uint32_t> access) {
  return encode_single(stream, st, tat, ctx, std::move(access), Mode::TAT);
}

WordStream tatbd(const EncryptedMessage& msg, const SymbolTable& st, TagTable& tat, TatContext& ctx) {
  return decode_single(msg, st, tat, ctx, Mode::TAT);
}

}  // namespace restcipher
