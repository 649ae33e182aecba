#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace restcipher {

enum class TokenKind { Open, AttrName, AttrValue, Variable, Close };

struct Token {
  TokenKind kind;
  std::string text;  // empty for Close

  friend bool operator==(const Token&, const Token&) = default;
};

// Canonical document form shared by XML and JSON.
using WordStream = std::vector<Token>;

inline Token open_token(std::string name) { return {TokenKind::Open, std::move(name)}; }
inline Token attr_name_token(std::string name) { return {TokenKind::AttrName, std::move(name)}; }
inline Token attr_value_token(std::string value) { return {TokenKind::AttrValue, std::move(value)}; }
inline Token variable_token(std::string text) { return {TokenKind::Variable, std::move(text)}; }
inline Token close_token() { return {TokenKind::Close, {}}; }

bool is_non_variable(TokenKind kind);

// Structural check: one root element, balanced, attributes only directly after
// their Open, content either one Variable, child elements, or nothing.
// Throws UnsupportedShape / MixedContentUnsupported / UnsupportedCharacter.
void validate_stream(const WordStream& stream);

// Element-only XML subset: elements, attributes, text leaves, the five
// predefined entities and numeric character references. An optional leading
// XML declaration is skipped. Whitespace-only text is insignificant.
WordStream parse_xml(std::string_view text);

// JSON using the XML mapping: keys are tags, "-name" keys are attributes,
// "#text" carries the text of an element that also has attributes, arrays
// repeat the enclosing tag. A bare `"root": {...}` member is accepted too.
WordStream parse_json(std::string_view text);

std::string emit_xml(const WordStream& stream);
// Every Variable is emitted as a JSON string; the text is what travels.
std::string emit_json(const WordStream& stream);

// One record per Open token, indexed by ordinal - 1.
struct TagInfo {
  std::uint32_t ordinal;  // 1-based document order
  std::uint32_t parent;   // 0 for the outermost tag
  std::string name;
  std::size_t open_index;   // token positions in the stream
  std::size_t close_index;
};

struct TagOrdinals {
  std::vector<TagInfo> tags;
  // For every token: ordinal of the innermost tag that contains it (an Open
  // or Close token belongs to its own tag).
  std::vector<std::uint32_t> owner_of_token;

  const TagInfo& tag(std::uint32_t ordinal) const { return tags.at(ordinal - 1); }
  std::size_t size() const { return tags.size(); }
};

TagOrdinals tag_ordinals(const WordStream& stream);

enum class ScalarType { String, Integer, Number, Boolean };

// Best-effort type of a decoded variable word, read off its JSON literal form.
ScalarType infer_scalar_type(std::string_view text);

// Debug rendering, one token per line.
std::string describe(const WordStream& stream);

}  // namespace restcipher
