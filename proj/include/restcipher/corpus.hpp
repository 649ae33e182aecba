#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "restcipher/docmodel.hpp"

namespace restcipher {

struct CorpusOptions {
  std::string charset;  // characters words are drawn from
  // Restrict tag and attribute names to XML name syntax.
  bool xml_names = true;
  std::size_t max_depth = 3;
  std::size_t max_children = 4;
  std::size_t max_attrs = 2;
  std::size_t min_name = 1, max_name = 8;   // non-variable word lengths
  std::size_t min_text = 1, max_text = 8;   // variable word lengths
  double text_probability = 0.8;            // chance a leaf carries text
  // Names come from a pool of this many words (0: fresh names throughout).
  std::size_t vocabulary = 6;
};

// Non-variable dominant: deep, many short-text tags over a small vocabulary.
CorpusOptions structure_heavy(std::string charset);
// Variable dominant: shallow documents with long text.
CorpusOptions text_heavy(std::string charset);

// A valid stream whose every word is drawn from options.charset. Throws
// UnsupportedShape when xml_names is set and the charset has no letter.
WordStream random_document(std::mt19937_64& rng, const CorpusOptions& options);

struct StreamCounts {
  std::size_t non_variable_chars = 0;
  std::size_t variable_chars = 0;
  std::size_t non_variable_words = 0;
  std::size_t variable_words = 0;
};

StreamCounts count_stream(const WordStream& stream);

}  // namespace restcipher
