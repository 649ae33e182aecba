#include "restcipher/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "restcipher/error.hpp"

namespace restcipher {

namespace {

class Generator {
 public:
  Generator(std::mt19937_64& rng, const CorpusOptions& opt) : rng_(rng), opt_(opt) {
    if (opt.charset.empty()) throw Error(Errc::UnsupportedShape, "empty charset");
    for (char c : opt.charset) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isalpha(u) || c == '_') name_start_ += c;
      if (std::isalnum(u) || c == '_' || c == '-' || c == '.') name_rest_ += c;
      if (c != ' ') text_solid_ += c;
    }
    if (!opt.xml_names) {
      name_start_ = name_rest_ = opt.charset;
    }
    if (name_start_.empty()) throw Error(Errc::UnsupportedShape, "charset has no character that can start a name");
    if (text_solid_.empty()) throw Error(Errc::UnsupportedShape, "charset has only spaces");
    for (std::size_t i = 0; i < opt.vocabulary; ++i) pool_.push_back(fresh_name());
  }

  WordStream document() {
    WordStream out;
    element(out, 0);
    return out;
  }

 private:
  std::size_t between(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, std::max(lo, hi))(rng_);
  }

  char pick(const std::string& from) { return from[between(0, from.size() - 1)]; }

  std::string fresh_name() {
    std::string s(1, pick(name_start_));
    const std::size_t len = between(std::max<std::size_t>(opt_.min_name, 1), opt_.max_name);
    while (s.size() < len) s += pick(name_rest_);
    return s;
  }

  std::string name() { return pool_.empty() ? fresh_name() : pool_[between(0, pool_.size() - 1)]; }

  // Printable text that is never blank, so XML keeps it.
  std::string text(std::size_t lo, std::size_t hi) {
    const std::size_t len = between(std::max<std::size_t>(lo, 1), hi);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += pick(opt_.charset);
    s[between(0, s.size() - 1)] = pick(text_solid_);
    return s;
  }

  void element(WordStream& out, std::size_t depth) {
    out.push_back(open_token(name()));
    std::vector<std::string> attrs;
    const std::size_t n_attrs = between(0, opt_.max_attrs);
    for (std::size_t i = 0; i < n_attrs; ++i) {
      std::string a = name();
      if (std::find(attrs.begin(), attrs.end(), a) != attrs.end()) continue;
      attrs.push_back(a);
      out.push_back(attr_name_token(a));
      out.push_back(attr_value_token(text(opt_.min_name, opt_.max_name)));
    }
    const bool leaf = depth >= opt_.max_depth || between(0, 3) == 0;
    if (leaf) {
      if (std::bernoulli_distribution(opt_.text_probability)(rng_)) {
        out.push_back(variable_token(text(opt_.min_text, opt_.max_text)));
      }
    } else {
      const std::size_t kids = between(1, std::max<std::size_t>(opt_.max_children, 1));
      for (std::size_t i = 0; i < kids; ++i) element(out, depth + 1);
    }
    out.push_back(close_token());
  }

  std::mt19937_64& rng_;
  const CorpusOptions& opt_;
  std::string name_start_, name_rest_, text_solid_;
  std::vector<std::string> pool_;
};

}  // namespace

CorpusOptions structure_heavy(std::string charset) {
  CorpusOptions o;
  o.charset = std::move(charset);
  o.max_depth = 4;
  o.max_children = 4;
  o.max_attrs = 2;
  o.min_name = 4;
  o.max_name = 10;
  o.min_text = 1;
  o.max_text = 3;
  o.vocabulary = 8;
  return o;
}

CorpusOptions text_heavy(std::string charset) {
  CorpusOptions o;
  o.charset = std::move(charset);
  o.max_depth = 1;
  o.max_children = 3;
  o.max_attrs = 0;
  o.min_name = 1;
  o.max_name = 3;
  o.min_text = 40;
  o.max_text = 120;
  o.text_probability = 1.0;
  o.vocabulary = 4;
  return o;
}

WordStream random_document(std::mt19937_64& rng, const CorpusOptions& options) {
  return Generator(rng, options).document();
}

StreamCounts count_stream(const WordStream& stream) {
  StreamCounts c;
  for (const auto& t : stream) {
    if (t.kind == TokenKind::Close) continue;
    if (t.kind == TokenKind::Variable) {
      c.variable_chars += t.text.size();
      ++c.variable_words;
    } else {
      c.non_variable_chars += t.text.size();
      ++c.non_variable_words;
    }
  }
  return c;
}

}  // namespace restcipher
