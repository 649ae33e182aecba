#include "restcipher/docmodel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

#include "restcipher/arrangement.hpp"
#include "restcipher/error.hpp"

namespace restcipher {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

bool all_space(std::string_view s) {
  return std::all_of(s.begin(), s.end(), is_space);
}

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

bool valid_name(std::string_view name) {
  return !name.empty() && is_name_start(name[0]) && std::all_of(name.begin() + 1, name.end(), is_name_char);
}

void require_printable(std::string_view text) {
  for (char c : text) {
    if (!is_printable_ascii(c)) {
      throw Error(Errc::UnsupportedCharacter, "character " + std::to_string(static_cast<int>(static_cast<unsigned char>(c))) +
                                     " is outside the printable ASCII range");
    }
  }
}

std::string printable_char(unsigned long cp) {
  if (cp < 0x20 || cp > 0x7e) {
    throw Error(Errc::UnsupportedCharacter,
                "character reference " + std::to_string(cp) + " is outside the printable ASCII range");
  }
  return std::string(1, static_cast<char>(cp));
}

// ---------------------------------------------------------------------------
// XML

class XmlParser {
 public:
  explicit XmlParser(std::string_view text) : s_(text) {}

  WordStream parse() {
    for (char c : s_) {
      if (static_cast<unsigned char>(c) >= 0x80) {
        throw Error(Errc::UnsupportedCharacter, "non-ASCII byte in document");
      }
    }
    skip_space();
    if (starts_with("<?xml")) {
      const auto end = s_.find("?>", pos_);
      if (end == std::string_view::npos) fail("unterminated XML declaration");
      pos_ = end + 2;
      skip_space();
    }
    if (pos_ >= s_.size()) fail("empty document");
    element();
    skip_space();
    if (pos_ != s_.size()) fail("content after the root element");
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(Errc::MalformedXml, why + " at offset " + std::to_string(pos_));
  }

  bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

  void skip_space() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void reject_markup() const {
    if (starts_with("<!--")) fail("comments are not supported");
    if (starts_with("<![CDATA[")) fail("CDATA sections are not supported");
    if (starts_with("<!")) fail("declarations are not supported");
    if (starts_with("<?")) fail("processing instructions are not supported");
  }

  std::string name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '>' && s_[pos_] != '/' &&
           s_[pos_] != '=' && s_[pos_] != '<') {
      ++pos_;
    }
    std::string n(s_.substr(start, pos_ - start));
    if (n.find(':') != std::string::npos) fail("namespaced name '" + n + "' is not supported");
    if (!valid_name(n)) fail("invalid name '" + n + "'");
    return n;
  }

  std::string decode(std::string_view raw) const {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const char c = raw[i];
      if (c == '<') fail("'<' inside text or attribute");
      if (c != '&') {
        out += c;
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      const std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "amp") out += '&';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (ent.size() > 1 && ent[0] == '#') {
        const bool hex = ent[1] == 'x';
        const std::string digits(ent.substr(hex ? 2 : 1));
        if (digits.empty() || digits.size() > 6) fail("bad character reference");
        std::size_t used = 0;
        unsigned long cp = 0;
        try {
          cp = std::stoul(digits, &used, hex ? 16 : 10);
        } catch (const std::exception&) {
          fail("bad character reference");
        }
        if (used != digits.size()) fail("bad character reference");
        out += printable_char(cp);
      } else {
        fail("unknown entity '&" + std::string(ent) + ";'");
      }
      i = semi;
    }
    return out;
  }

  void element() {
    reject_markup();
    expect('<');
    const std::string tag = name();
    out_.push_back(open_token(tag));

    std::set<std::string> seen;
    while (true) {
      const std::size_t before = pos_;
      skip_space();
      if (pos_ >= s_.size()) fail("unterminated start tag");
      if (s_[pos_] == '/' || s_[pos_] == '>') break;
      if (before == pos_) fail("expected whitespace before attribute");
      std::string attr = name();
      if (!seen.insert(attr).second) fail("duplicate attribute '" + attr + "'");
      skip_space();
      expect('=');
      skip_space();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("expected quoted attribute value");
      const char quote = s_[pos_++];
      const auto end = s_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      std::string value = decode(s_.substr(pos_, end - pos_));
      pos_ = end + 1;
      require_printable(value);
      if (value.empty()) throw Error(Errc::UnsupportedShape, "empty attribute value for '" + attr + "'");
      out_.push_back(attr_name_token(std::move(attr)));
      out_.push_back(attr_value_token(std::move(value)));
    }
    if (s_[pos_] == '/') {
      ++pos_;
      expect('>');
      out_.push_back(close_token());
      return;
    }
    expect('>');

    bool has_children = false;
    std::optional<std::string> text;
    while (true) {
      const auto lt = s_.find('<', pos_);
      if (lt == std::string_view::npos) fail("unterminated element");
      const std::string_view raw = s_.substr(pos_, lt - pos_);
      pos_ = lt;
      if (!all_space(raw)) {
        if (has_children || text) throw Error(Errc::MixedContentUnsupported, "text mixed with child elements");
        text = decode(raw);
      }
      if (starts_with("</")) break;
      if (text) throw Error(Errc::MixedContentUnsupported, "child element after text");
      has_children = true;
      element();
    }
    if (text) {
      require_printable(*text);
      if (!all_space(*text)) out_.push_back(variable_token(std::move(*text)));
    }
    pos_ += 2;
    const std::string closing = name();
    if (closing != tag) fail("closing tag '" + closing + "' does not match '" + tag + "'");
    skip_space();
    expect('>');
    out_.push_back(close_token());
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  WordStream out_;
};

// ---------------------------------------------------------------------------
// JSON

struct JsonValue {
  enum class Type { Null, Bool, Number, String, Object, Array } type = Type::Null;
  std::string scalar;
  std::vector<std::pair<std::string, JsonValue>> members;  // order and duplicates kept
  std::vector<JsonValue> items;

  bool is_scalar() const { return type == Type::Bool || type == Type::Number || type == Type::String; }
};

// Builds a JsonValue tree from parser events so member order and duplicate
// keys survive.
class JsonTreeBuilder {
 public:
  JsonValue root;

  bool null() { return add(JsonValue{}) != nullptr; }
  bool boolean(bool b) { return add(scalar(JsonValue::Type::Bool, b ? "true" : "false")) != nullptr; }
  bool number_integer(std::int64_t n) { return add(scalar(JsonValue::Type::Number, std::to_string(n))) != nullptr; }
  bool number_unsigned(std::uint64_t n) { return add(scalar(JsonValue::Type::Number, std::to_string(n))) != nullptr; }
  bool number_float(double, const std::string& literal) {
    return add(scalar(JsonValue::Type::Number, literal)) != nullptr;
  }
  bool string(std::string& text) { return add(scalar(JsonValue::Type::String, std::move(text))) != nullptr; }
  bool binary(nlohmann::json::binary_t&) { return false; }
  bool start_object(std::size_t) { return open(JsonValue::Type::Object); }
  bool end_object() { return close(); }
  bool start_array(std::size_t) { return open(JsonValue::Type::Array); }
  bool end_array() { return close(); }
  bool key(std::string& k) {
    key_ = std::move(k);
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& e) {
    throw Error(Errc::MalformedJson, e.what());
  }

 private:
  static constexpr std::size_t kMaxDepth = 256;

  static JsonValue scalar(JsonValue::Type type, std::string text) {
    JsonValue v;
    v.type = type;
    v.scalar = std::move(text);
    return v;
  }

  JsonValue* add(JsonValue v) {
    if (open_.empty()) {
      root = std::move(v);
      return &root;
    }
    JsonValue& parent = *open_.back();
    if (parent.type == JsonValue::Type::Object) {
      parent.members.emplace_back(std::move(key_), std::move(v));
      return &parent.members.back().second;
    }
    parent.items.push_back(std::move(v));
    return &parent.items.back();
  }

  bool open(JsonValue::Type type) {
    if (open_.size() >= kMaxDepth) throw Error(Errc::MalformedJson, "nesting too deep");
    JsonValue v;
    v.type = type;
    open_.push_back(add(std::move(v)));
    return true;
  }

  bool close() {
    open_.pop_back();
    return true;
  }

  std::vector<JsonValue*> open_;
  std::string key_;
};

JsonValue parse_json_value(std::string_view text) {
  JsonTreeBuilder builder;
  if (!nlohmann::json::sax_parse(text, &builder)) throw Error(Errc::MalformedJson, "unsupported JSON value");
  return std::move(builder.root);
}

void json_element(const std::string& name, const JsonValue& v, WordStream& out);

void json_scalar_content(const JsonValue& v, WordStream& out) {
  require_printable(v.scalar);
  if (!all_space(v.scalar)) out.push_back(variable_token(v.scalar));
}

void json_element(const std::string& name, const JsonValue& v, WordStream& out) {
  if (!valid_name(name)) throw Error(Errc::UnsupportedShape, "invalid tag name '" + name + "'");
  out.push_back(open_token(name));
  switch (v.type) {
    case JsonValue::Type::Null: break;
    case JsonValue::Type::Bool:
    case JsonValue::Type::Number:
    case JsonValue::Type::String: json_scalar_content(v, out); break;
    case JsonValue::Type::Array: throw Error(Errc::UnsupportedShape, "nested array under '" + name + "'");
    case JsonValue::Type::Object: {
      std::set<std::string> attrs;
      const JsonValue* text = nullptr;
      bool has_children = false;
      for (const auto& [key, member] : v.members) {
        if (key == "#text") {
          if (text || !member.is_scalar()) throw Error(Errc::UnsupportedShape, "bad #text under '" + name + "'");
          text = &member;
        } else if (!key.empty() && key[0] == '-') {
          const std::string attr = key.substr(1);
          if (!valid_name(attr)) throw Error(Errc::UnsupportedShape, "invalid attribute name '" + attr + "'");
          if (!member.is_scalar()) throw Error(Errc::UnsupportedShape, "attribute '" + attr + "' is not a scalar");
          if (!attrs.insert(attr).second) throw Error(Errc::UnsupportedShape, "duplicate attribute '" + attr + "'");
          require_printable(member.scalar);
          if (member.scalar.empty()) throw Error(Errc::UnsupportedShape, "empty attribute value for '" + attr + "'");
          out.push_back(attr_name_token(attr));
          out.push_back(attr_value_token(member.scalar));
        } else {
          has_children = true;
        }
      }
      if (text && has_children) {
        throw Error(Errc::MixedContentUnsupported, "#text mixed with child elements under '" + name + "'");
      }
      if (text) json_scalar_content(*text, out);
      for (const auto& [key, member] : v.members) {
        if (key == "#text" || (!key.empty() && key[0] == '-')) continue;
        if (member.type == JsonValue::Type::Array) {
          for (const auto& item : member.items) {
            if (item.type == JsonValue::Type::Array) {
              throw Error(Errc::UnsupportedShape, "nested array under '" + key + "'");
            }
            json_element(key, item, out);
          }
        } else {
          json_element(key, member, out);
        }
      }
      break;
    }
  }
  out.push_back(close_token());
}

// ---------------------------------------------------------------------------
// Emission helpers

struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::optional<std::string> text;
  std::vector<Node> children;
};

Node build_tree(const WordStream& stream) {
  validate_stream(stream);
  std::vector<Node> stack;
  Node root;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Token& t = stream[i];
    switch (t.kind) {
      case TokenKind::Open: stack.push_back(Node{t.text, {}, {}, {}}); break;
      case TokenKind::AttrName: stack.back().attrs.emplace_back(t.text, stream[i + 1].text); break;
      case TokenKind::AttrValue: break;
      case TokenKind::Variable: stack.back().text = t.text; break;
      case TokenKind::Close: {
        Node done = std::move(stack.back());
        stack.pop_back();
        if (stack.empty()) {
          root = std::move(done);
        } else {
          stack.back().children.push_back(std::move(done));
        }
        break;
      }
    }
  }
  return root;
}

void check_names(const Node& n) {
  if (!valid_name(n.name)) throw Error(Errc::UnsupportedShape, "tag name '" + n.name + "' cannot be emitted");
  for (const auto& [k, v] : n.attrs) {
    if (!valid_name(k)) throw Error(Errc::UnsupportedShape, "attribute name '" + k + "' cannot be emitted");
  }
  for (const auto& c : n.children) check_names(c);
}

void xml_escape(std::string& out, std::string_view text, bool attribute) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
        } else {
          out += c;
        }
        break;
      default: out += c;
    }
  }
}

void emit_xml_node(const Node& n, std::string& out) {
  out += '<';
  out += n.name;
  for (const auto& [k, v] : n.attrs) {
    out += ' ';
    out += k;
    out += "=\"";
    xml_escape(out, v, true);
    out += '"';
  }
  out += '>';
  if (n.text) xml_escape(out, *n.text, false);
  for (const auto& c : n.children) emit_xml_node(c, out);
  out += "</";
  out += n.name;
  out += '>';
}

void json_string(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
}

void emit_json_value(const Node& n, std::string& out) {
  if (n.attrs.empty() && n.children.empty()) {
    json_string(out, n.text.value_or(""));
    return;
  }
  out += '{';
  bool first = true;
  auto sep = [&] {
    if (!first) out += ',';
    first = false;
  };
  for (const auto& [k, v] : n.attrs) {
    sep();
    json_string(out, "-" + k);
    out += ':';
    json_string(out, v);
  }
  if (n.text) {
    sep();
    json_string(out, "#text");
    out += ':';
    json_string(out, *n.text);
  }
  for (std::size_t i = 0; i < n.children.size();) {
    std::size_t j = i;
    while (j < n.children.size() && n.children[j].name == n.children[i].name) ++j;
    sep();
    json_string(out, n.children[i].name);
    out += ':';
    if (j - i == 1) {
      emit_json_value(n.children[i], out);
    } else {
      out += '[';
      for (std::size_t k = i; k < j; ++k) {
        if (k != i) out += ',';
        emit_json_value(n.children[k], out);
      }
      out += ']';
    }
    i = j;
  }
  out += '}';
}

}  // namespace

bool is_non_variable(TokenKind kind) {
  return kind == TokenKind::Open || kind == TokenKind::AttrName || kind == TokenKind::AttrValue;
}

void validate_stream(const WordStream& stream) {
  if (stream.empty()) throw Error(Errc::UnsupportedShape, "empty stream");
  if (stream.front().kind != TokenKind::Open) throw Error(Errc::UnsupportedShape, "stream must start with a tag");

  // Per open element: can attributes still follow, does it hold text, does it hold children.
  struct Frame {
    bool attrs_open = true;
    bool has_text = false;
    bool has_children = false;
  };
  std::vector<Frame> stack;
  bool root_closed = false;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Token& t = stream[i];
    if (root_closed) throw Error(Errc::UnsupportedShape, "tokens after the root element");
    if (t.kind != TokenKind::Close) {
      if (t.text.empty()) throw Error(Errc::UnsupportedShape, "empty word at token " + std::to_string(i));
      require_printable(t.text);
    }
    switch (t.kind) {
      case TokenKind::Open:
        if (!stack.empty()) {
          Frame& parent = stack.back();
          if (parent.has_text) throw Error(Errc::MixedContentUnsupported, "element after text");
          parent.attrs_open = false;
          parent.has_children = true;
        }
        stack.push_back({});
        break;
      case TokenKind::AttrName:
        if (stack.empty() || !stack.back().attrs_open) {
          throw Error(Errc::UnsupportedShape, "attribute outside a start tag at token " + std::to_string(i));
        }
        if (i + 1 >= stream.size() || stream[i + 1].kind != TokenKind::AttrValue) {
          throw Error(Errc::UnsupportedShape, "attribute name without value at token " + std::to_string(i));
        }
        break;
      case TokenKind::AttrValue:
        if (i == 0 || stream[i - 1].kind != TokenKind::AttrName) {
          throw Error(Errc::UnsupportedShape, "attribute value without name at token " + std::to_string(i));
        }
        break;
      case TokenKind::Variable: {
        if (stack.empty()) throw Error(Errc::UnsupportedShape, "text outside the root element");
        Frame& f = stack.back();
        if (f.has_children || f.has_text) throw Error(Errc::MixedContentUnsupported, "text mixed with elements");
        if (all_space(t.text)) throw Error(Errc::UnsupportedShape, "whitespace-only text");
        f.attrs_open = false;
        f.has_text = true;
        break;
      }
      case TokenKind::Close:
        if (stack.empty()) throw Error(Errc::UnsupportedShape, "unbalanced close at token " + std::to_string(i));
        stack.pop_back();
        root_closed = stack.empty();
        break;
    }
  }
  if (!stack.empty()) throw Error(Errc::UnsupportedShape, "unclosed elements at end of stream");
}

WordStream parse_xml(std::string_view text) {
  WordStream out = XmlParser(text).parse();
  validate_stream(out);
  return out;
}

WordStream parse_json(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error(Errc::MalformedJson, "empty document");
  for (char c : text) {
    if (static_cast<unsigned char>(c) >= 0x80) throw Error(Errc::UnsupportedCharacter, "non-ASCII byte in document");
  }
  // A bare `"name": value` member is read as if it were braced.
  const JsonValue doc =
      parse_json_value(text[first] == '"' ? "{" + std::string(text) + "}" : std::string(text));
  if (doc.type != JsonValue::Type::Object || doc.members.size() != 1) {
    throw Error(Errc::UnsupportedShape, "document must be an object with exactly one root member");
  }
  const auto& [name, value] = doc.members.front();
  if (name.empty() || name[0] == '-' || name == "#text" || value.type == JsonValue::Type::Array) {
    throw Error(Errc::UnsupportedShape, "root member must be a single tag");
  }
  WordStream out;
  json_element(name, value, out);
  validate_stream(out);
  return out;
}

std::string emit_xml(const WordStream& stream) {
  const Node root = build_tree(stream);
  check_names(root);
  std::string out;
  emit_xml_node(root, out);
  return out;
}

std::string emit_json(const WordStream& stream) {
  const Node root = build_tree(stream);
  check_names(root);
  std::string out = "{";
  json_string(out, root.name);
  out += ':';
  emit_json_value(root, out);
  out += '}';
  return out;
}

TagOrdinals tag_ordinals(const WordStream& stream) {
  TagOrdinals result;
  result.owner_of_token.resize(stream.size(), 0);
  std::vector<std::uint32_t> stack;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Token& t = stream[i];
    if (t.kind == TokenKind::Open) {
      const auto ordinal = static_cast<std::uint32_t>(result.tags.size() + 1);
      result.tags.push_back({ordinal, stack.empty() ? 0u : stack.back(), t.text, i, i});
      stack.push_back(ordinal);
      result.owner_of_token[i] = ordinal;
    } else if (t.kind == TokenKind::Close) {
      if (stack.empty()) throw Error(Errc::UnsupportedShape, "unbalanced close");
      result.owner_of_token[i] = stack.back();
      result.tags[stack.back() - 1].close_index = i;
      stack.pop_back();
    } else {
      if (stack.empty()) throw Error(Errc::UnsupportedShape, "token outside any element");
      result.owner_of_token[i] = stack.back();
    }
  }
  return result;
}

ScalarType infer_scalar_type(std::string_view text) {
  if (text == "true" || text == "false") return ScalarType::Boolean;
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  const std::size_t int_start = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  const std::size_t int_len = i - int_start;
  if (int_len == 0 || (int_len > 1 && text[int_start] == '0')) return ScalarType::String;
  if (i == text.size()) return ScalarType::Integer;
  if (text[i] == '.') {
    const std::size_t frac = ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == frac) return ScalarType::String;
  }
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    const std::size_t exp = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == exp) return ScalarType::String;
  }
  return i == text.size() ? ScalarType::Number : ScalarType::String;
}

std::string describe(const WordStream& stream) {
  std::string out;
  for (const Token& t : stream) {
    switch (t.kind) {
      case TokenKind::Open: out += "Open " + t.text; break;
      case TokenKind::AttrName: out += "AttrName " + t.text; break;
      case TokenKind::AttrValue: out += "AttrValue " + t.text; break;
      case TokenKind::Variable: out += "Variable " + t.text; break;
      case TokenKind::Close: out += "Close"; break;
    }
    out += '\n';
  }
  return out;
}

}  // namespace restcipher
