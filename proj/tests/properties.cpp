#include "properties.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <tuple>
#include <sstream>

#include "restcipher/codec.hpp"
#include "restcipher/composition.hpp"
#include "restcipher/corpus.hpp"
#include "restcipher/error.hpp"
#include "restcipher/restkit.hpp"
#include "restcipher/tables.hpp"
#include "support.hpp"

using namespace restcipher;

namespace props {

void Outcome::fail(std::string what) {
  if (failures++ == 0) first_failure = std::move(what);
}

namespace {

std::string dump_st(const SymbolTable& st) {
  std::ostringstream out;
  for (const auto& e : st.entries()) out << static_cast<int>(e.character) << ':' << e.code << ' ';
  return out.str();
}

KeyBounds printable_bounds() { return KeyBounds{}.set(5, 40, 63); }

std::size_t below(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

EncryptedMessage encode(Mode mode, const WordStream& doc, CodecSession& s) {
  return mode == Mode::ST ? stbe(doc, s.st, s.tat, s.ctx) : tatbe(doc, s.st, s.tat, s.ctx);
}

WordStream decode(Mode mode, const EncryptedMessage& msg, CodecSession& s) {
  return mode == Mode::ST ? stbd(msg, s.st, s.tat, s.ctx) : tatbd(msg, s.st, s.tat, s.ctx);
}

// Children of the root always get a pairwise key; deeper tags sometimes
// switch to another one.
CompositionPolicy random_policy(const TagOrdinals& tags, const std::vector<std::string>& pairwise,
                                std::mt19937_64& rng) {
  CompositionPolicy p;
  for (const auto& t : tags.tags) {
    if (t.parent == 0) continue;
    if (t.parent == 1 || std::bernoulli_distribution(0.3)(rng)) p.owners[t.ordinal] = pairwise[below(rng, pairwise.size())];
  }
  return p;
}

KeyRing make_ring(const std::vector<std::pair<std::string, TenElementKey>>& keys) {
  KeyRing ring;
  for (std::size_t i = 0; i < keys.size(); ++i) ring.add(keys[i].first, keys[i].second, i == 0);
  return ring;
}

std::vector<std::pair<std::string, TenElementKey>> random_keys(std::mt19937_64& rng, std::size_t pairwise) {
  std::vector<std::pair<std::string, TenElementKey>> keys;
  keys.emplace_back("G", generate_key(printable_bounds(), rng));
  for (std::size_t i = 0; i < pairwise; ++i) keys.emplace_back("P" + std::to_string(i + 1), generate_key(printable_bounds(), rng));
  return keys;
}

std::optional<std::string> text_of(const WordStream& doc, const TagOrdinals& tags, std::uint32_t ord) {
  const auto& t = tags.tag(ord);
  for (std::size_t i = t.open_index; i < t.close_index; ++i) {
    if (doc[i].kind == TokenKind::Variable && tags.owner_of_token[i] == ord) return doc[i].text;
  }
  return std::nullopt;
}

CorpusOptions document_options(std::mt19937_64& rng, std::string charset) {
  switch (below(rng, 3)) {
    case 0: return structure_heavy(std::move(charset));
    case 1: return text_heavy(std::move(charset));
    default: {
      CorpusOptions o;
      o.charset = std::move(charset);
      return o;
    }
  }
}

}  // namespace

Outcome round_trip(std::uint64_t seed, std::size_t pairs) {
  std::mt19937_64 rng(seed);
  Outcome out;
  for (std::size_t i = 0; i < pairs; ++i) {
    const TenElementKey key = support::random_key(rng);
    auto opts = document_options(rng, charset_for(key.symbol_type));
    opts.xml_names = false;
    const WordStream doc = random_document(rng, opts);
    ++out.trials;
    const std::string where = serialize_key(key) + " pair " + std::to_string(i);
    // stbe then tatbe in one session, and tatbe on a fresh session.
    CodecSession enc(key), dec(key), fresh_enc(key), fresh_dec(key);
    const std::tuple<Mode, CodecSession*, CodecSession*> steps[] = {
        {Mode::ST, &enc, &dec}, {Mode::TAT, &enc, &dec}, {Mode::TAT, &fresh_enc, &fresh_dec}};
    try {
      for (const auto& [mode, e, d] : steps) {
        const std::string wire = encode(mode, doc, *e).serialize();
        const WordStream back = decode(mode, EncryptedMessage::parse(wire), *d);
        if (back != doc) {
          out.fail(where + ": decoded stream differs\n" + describe(doc) + "---\n" + describe(back));
          break;
        }
        if (!(e->tat == d->tat)) {
          out.fail(where + ": tag tables diverged");
          break;
        }
      }
    } catch (const Error& e) {
      out.fail(where + ": " + e.what());
    }
  }
  return out;
}

Outcome sessions(std::uint64_t seed, std::size_t count, std::size_t messages) {
  std::mt19937_64 rng(seed);
  Outcome out;
  for (std::size_t i = 0; i < count; ++i) {
    const TenElementKey key = support::random_key(rng);
    auto opts = document_options(rng, charset_for(key.symbol_type));
    opts.xml_names = false;
    opts.vocabulary = 0;
    CodecSession enc(key), dec(key);
    for (std::size_t m = 0; m < messages; ++m) {
      const WordStream doc = random_document(rng, opts);
      const Mode mode = below(rng, 3) ? Mode::TAT : Mode::ST;
      const std::string where = serialize_key(key) + " session " + std::to_string(i) + " message " + std::to_string(m);
      ++out.trials;
      try {
        const std::string wire = encode(mode, doc, enc).serialize();
        if (decode(mode, EncryptedMessage::parse(wire), dec) != doc) out.fail(where + ": decoded stream differs");
      } catch (const Error& e) {
        if (e.code() == Errc::AmbiguousEncoding) {
          ++out.skipped;
        } else {
          out.fail(where + ": " + e.what());
        }
      }
      if (!(enc.tat == dec.tat) || enc.ctx.digits != dec.ctx.digits) {
        out.fail(where + ": tag tables diverged");
        break;
      }
    }
  }
  return out;
}

Outcome symbol_table_oracle(std::uint64_t seed, std::size_t keys) {
  std::mt19937_64 rng(seed);
  Outcome out;
  for (std::size_t i = 0; i < keys; ++i) {
    const TenElementKey key = support::random_key(rng);
    ++out.trials;
    const SymbolTable st = build_st(key);
    const auto expected = support::oracle_symbol_table(key);
    bool same = st.entries().size() == expected.size();
    for (std::size_t j = 0; same && j < expected.size(); ++j) {
      same = st.entries()[j].character == expected[j].first && st.entries()[j].code == expected[j].second;
    }
    if (!same) out.fail("symbol table of " + serialize_key(key));
  }
  return out;
}

Outcome format_invariance(std::uint64_t seed, std::size_t pairs) {
  std::mt19937_64 rng(seed);
  Outcome out;
  for (std::size_t i = 0; i < pairs; ++i) {
    const TenElementKey key = generate_key(printable_bounds(), rng);
    const WordStream doc = random_document(rng, document_options(rng, charset_for(key.symbol_type)));
    ++out.trials;
    try {
      const std::string xml = emit_xml(doc);
      const std::string json = emit_json(doc);
      const WordStream from_xml = parse_xml(xml);
      const WordStream from_json = parse_json(json);
      if (from_xml != doc || from_json != doc) {
        out.fail("rendering does not re-parse to the same stream\n" + xml + "\n" + json);
        continue;
      }
      CodecSession a(key), b(key);
      for (Mode mode : {Mode::ST, Mode::TAT, Mode::TAT}) {
        if (encode(mode, from_xml, a).serialize() != encode(mode, from_json, b).serialize()) {
          out.fail("ciphertexts differ for\n" + xml + "\n" + json);
          break;
        }
      }
    } catch (const Error& e) {
      out.fail(std::string("format pair: ") + e.what());
    }
  }
  return out;
}

std::vector<Stratum> size_strata(std::uint64_t seed, std::size_t per_stratum) {
  std::mt19937_64 rng(seed);
  const TenElementKey key = parse_key("[12,6,1,1,1,14,4,1,3,2]");
  const std::string charset = charset_for(key.symbol_type);
  std::vector<Stratum> strata{{"non-variable-dominant"}, {"variable-dominant"}};
  std::vector<double> ratio_sum(2, 0);
  // Documents are drawn from both presets and binned by their measured counts.
  for (std::size_t guard = 0; guard < per_stratum * 20; ++guard) {
    if (strata[0].documents >= per_stratum && strata[1].documents >= per_stratum) break;
    const auto opts = guard % 2 ? text_heavy(charset) : structure_heavy(charset);
    const WordStream doc = random_document(rng, opts);
    const StreamCounts c = count_stream(doc);
    Stratum& s = strata[c.non_variable_chars > c.variable_chars ? 0 : 1];
    if (s.documents >= per_stratum) continue;
    CodecSession session(key);
    const auto st_len = stbe(doc, session.st, session.tat, session.ctx).serialize().size();
    const auto tat_len = tatbe(doc, session.st, session.tat, session.ctx).serialize().size();
    ++s.documents;
    s.tatbe_smaller += tat_len < st_len;
    ratio_sum[&s - strata.data()] += static_cast<double>(tat_len) / static_cast<double>(st_len);
    s.non_variable_chars += c.non_variable_chars;
    s.variable_chars += c.variable_chars;
  }
  for (std::size_t i = 0; i < strata.size(); ++i) {
    if (strata[i].documents) strata[i].mean_ratio = ratio_sum[i] / static_cast<double>(strata[i].documents);
  }
  return strata;
}

Outcome tamper(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  const std::string printable = charset_for(63);
  Outcome out;
  while (out.trials < trials) {
    const auto keys = random_keys(rng, 2);
    KeyRing ring = make_ring(keys);
    CorpusOptions opts;
    opts.charset = printable;
    const WordStream doc = random_document(rng, opts);
    const TagOrdinals tags = tag_ordinals(doc);
    const CompositionPolicy policy = random_policy(tags, {"P1", "P2"}, rng);
    const Mode mode = below(rng, 2) ? Mode::ST : Mode::TAT;
    const auto alg = static_cast<DigestAlgorithm>(below(rng, 3));
    const auto body = compose_encrypt(doc, policy, ring, mode);
    const auto signed_words = attach_digests(body, policy, ring, alg);
    if (!verify_digests(signed_words, ring, policy, alg).accepted()) {
      out.fail("untampered message rejected");
      ++out.trials;
      continue;
    }
    // Several flips per message, each applied to a fresh copy.
    for (int k = 0; k < 5 && out.trials < trials; ++k) {
      ++out.trials;
      auto words = signed_words;
      std::size_t w;
      do {
        w = below(rng, words.size());
      } while (is_digest_word(words[w]));
      std::string& word = words[w];
      const std::size_t pos = below(rng, word.size());
      char c;
      do {
        c = printable[below(rng, printable.size())];
      } while (c == word[pos]);
      const std::string before = word;
      word[pos] = c;
      const std::string wire = join_words(words);
      std::vector<std::string> received;
      try {
        received = EncryptedMessage::parse(wire).words;
      } catch (const Error&) {
        continue;  // rejected before verification
      }
      const auto report = verify_digests(received, ring, policy, alg);
      if (report.accepted() || (report.well_formed && report.verdict_for(1) != Verdict::Reject)) {
        out.fail("accepted after changing '" + before + "' to '" + word + "'");
      }
    }
  }
  return out;
}

Outcome composition(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  Outcome out;
  for (std::size_t i = 0; i < trials; ++i) {
    ++out.trials;
    const auto keys = random_keys(rng, 3);
    KeyRing sender = make_ring(keys);
    CorpusOptions opts;
    opts.charset = charset_for(63);
    const WordStream doc = random_document(rng, opts);
    const TagOrdinals tags = tag_ordinals(doc);
    const CompositionPolicy policy = random_policy(tags, {"P1", "P2", "P3"}, rng);
    const Mode mode = below(rng, 2) ? Mode::ST : Mode::TAT;
    try {
      validate_policy(tags, policy, sender);
      const auto signed_words = attach_digests(compose_encrypt(doc, policy, sender, mode), policy, sender);
      std::vector<std::uint32_t> parents;
      for (const auto& t : tags.tags) parents.push_back(t.parent);
      const auto owners = resolve_owners(parents, policy, sender);

      for (std::size_t p = 1; p < keys.size(); ++p) {
        const std::string id = keys[p].first;
        const std::vector<std::string> held_ids{id, "G"};
        const auto access = access_header(tags, policy, sender, held_ids);
        KeyRing held = make_ring({keys[0], keys[p]});
        const auto view = recipient_view(access, id);
        const auto partial = compose_decrypt({access, signed_words}, held, view, mode);
        for (const auto& t : tags.tags) {
          const auto expected = text_of(doc, tags, t.ordinal);
          if (!expected) continue;
          const bool readable = owners[t.ordinal - 1] == id || owners[t.ordinal - 1] == "G";
          const auto seen = partial.variable_of(t.ordinal);
          if (readable ? seen != expected : seen.has_value()) {
            out.fail(id + " reading tag " + std::to_string(t.ordinal) + " of\n" + emit_xml(doc));
          }
        }
        if (!verify_digests(signed_words, held, view).accepted()) out.fail(id + " rejected an honest message");
      }
      KeyRing reader = make_ring(keys);
      const auto full = compose_decrypt({{1}, signed_words}, reader, policy, mode);
      if (!full.complete() || full.stream() != doc) out.fail("full ring did not recover\n" + emit_xml(doc));
    } catch (const Error& e) {
      out.fail(std::string(e.what()) + "\n" + emit_xml(doc));
    }
  }
  return out;
}

Outcome key_exchange(std::uint64_t seed, std::size_t keys) {
  Outcome out;
  ResourceServer server("S", KeyBounds{}, seed);
  const int port = server.start();
  std::set<std::string> distinct;
  for (std::size_t i = 0; i < keys; ++i) {
    ++out.trials;
    const std::string peer = "C" + std::to_string(i);
    try {
      ResourceClient client(peer, "127.0.0.1", port, "S");
      const TenElementKey mine = client.obtain_key();
      const auto theirs = server.store().get(peer, "session");
      if (!theirs) {
        out.fail(peer + ": server kept no key");
        continue;
      }
      distinct.insert(serialize_key(mine));
      if (dump_st(build_st(mine)) != dump_st(build_st(theirs->key))) out.fail(peer + ": symbol tables differ");
    } catch (const Error& e) {
      out.fail(peer + ": " + e.what());
    }
  }
  server.stop();
  if (distinct.size() < keys / 2) out.fail("server handed out only " + std::to_string(distinct.size()) + " distinct keys");
  return out;
}

}  // namespace props
