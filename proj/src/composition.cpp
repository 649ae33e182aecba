#include "restcipher/composition.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <memory>
#include <set>

#include "restcipher/error.hpp"

namespace restcipher {

namespace {

const EVP_MD* evp_for(DigestAlgorithm alg) {
  switch (alg) {
    case DigestAlgorithm::MD5: return EVP_md5();
    case DigestAlgorithm::SHA1: return EVP_sha1();
    case DigestAlgorithm::SHA256: return EVP_sha256();
  }
  return EVP_md5();
}

std::uint32_t parse_ordinal(std::string_view s) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v == 0) {
    throw Error(Errc::InvalidPolicy, "bad tag ordinal '" + std::string(s) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

std::vector<std::uint32_t> parents_of(const TagOrdinals& tags) {
  std::vector<std::uint32_t> parents;
  parents.reserve(tags.size());
  for (const auto& t : tags.tags) parents.push_back(t.parent);
  return parents;
}

// Tags whose key differs from their parent's; these carry digests.
std::vector<bool> ownership_roots(std::span<const std::uint32_t> parents,
                                  const std::vector<std::optional<std::string>>& owners) {
  std::vector<bool> roots(parents.size(), false);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (!owners[i]) continue;
    roots[i] = parents[i] == 0 || owners[parents[i] - 1] != owners[i];
  }
  return roots;
}

std::string segment_digest(const Skeleton& sk, std::uint32_t ordinal, const TenElementKey& key,
                           DigestAlgorithm alg) {
  const std::size_t open = sk.open_index[ordinal - 1];
  const std::size_t close = sk.close_index[ordinal - 1];
  return sign_segment(std::span<const std::string>(sk.body).subspan(open, close - open + 1), key, alg);
}

// Body words with `digests` inserted after the closer of their tags.
std::vector<std::string> interleave(const Skeleton& sk, const std::map<std::uint32_t, std::string>& digests) {
  std::vector<std::string> out;
  out.reserve(sk.body.size() + digests.size());
  for (std::size_t i = 0; i < sk.body.size(); ++i) {
    out.push_back(sk.body[i]);
    if (sk.kinds[i] != WordKind::Closer) continue;
    auto it = digests.find(sk.tag_of_word[i]);
    if (it != digests.end() && sk.close_index[it->first - 1] == i) out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::string_view digest_algorithm_name(DigestAlgorithm alg) {
  switch (alg) {
    case DigestAlgorithm::MD5: return "md5";
    case DigestAlgorithm::SHA1: return "sha1";
    case DigestAlgorithm::SHA256: return "sha256";
  }
  return "?";
}

std::optional<DigestAlgorithm> digest_algorithm_from_name(std::string_view name) {
  for (auto alg : {DigestAlgorithm::MD5, DigestAlgorithm::SHA1, DigestAlgorithm::SHA256}) {
    if (digest_algorithm_name(alg) == name) return alg;
  }
  return std::nullopt;
}

std::string hex_digest(DigestAlgorithm alg, std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), evp_for(alg), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw Error(Errc::VerificationFailed, "digest computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

void KeyRing::add(std::string id, const TenElementKey& key, bool group) {
  if (id.empty()) throw Error(Errc::InvalidPolicy, "empty key id");
  if (find(id)) throw Error(Errc::InvalidPolicy, "duplicate key id '" + id + "'");
  if (group && has_group()) throw Error(Errc::InvalidPolicy, "ring already has a group key");
  entries_.push_back(Entry{std::move(id), key, group, build_st(key), {}, {}});
}

const KeyRing::Entry* KeyRing::find(std::string_view id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

KeyRing::Entry* KeyRing::find(std::string_view id) {
  return const_cast<Entry*>(std::as_const(*this).find(id));
}

std::optional<std::size_t> KeyRing::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  return std::nullopt;
}

const KeyRing::Entry& KeyRing::group() const {
  for (const auto& e : entries_) {
    if (e.group) return e;
  }
  throw Error(Errc::MissingKey, "no group key");
}

bool KeyRing::has_group() const {
  return std::any_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.group; });
}

std::vector<CodecLane> KeyRing::lanes() {
  std::vector<CodecLane> out;
  out.reserve(entries_.size());
  for (auto& e : entries_) out.push_back({&e.st, &e.tat, &e.ctx});
  return out;
}

CompositionPolicy CompositionPolicy::parse(std::string_view text) {
  CompositionPolicy p;
  text = trim(text);
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::InvalidPolicy, "expected ordinal=key in '" + std::string(item) + "'");
    const std::uint32_t ord = parse_ordinal(trim(item.substr(0, eq)));
    const std::string id(trim(item.substr(eq + 1)));
    if (id.empty()) throw Error(Errc::InvalidPolicy, "missing key id for tag " + std::to_string(ord));
    if (!p.owners.emplace(ord, id).second) throw Error(Errc::InvalidPolicy, "tag " + std::to_string(ord) + " listed twice");
  }
  return p;
}

CompositionPolicy recipient_view(std::span<const std::uint32_t> access, const std::string& pairwise_id) {
  CompositionPolicy p;
  p.exhaustive = false;
  if (pairwise_id.empty()) return p;
  for (std::uint32_t ord : access) {
    if (ord > 1) p.owners[ord] = pairwise_id;
  }
  return p;
}

std::vector<std::optional<std::string>> resolve_owners(std::span<const std::uint32_t> parents,
                                                       const CompositionPolicy& policy, const KeyRing& ring) {
  std::vector<std::optional<std::string>> owners(parents.size());
  const std::optional<std::string> group =
      ring.has_group() ? std::optional<std::string>(ring.group().id) : std::nullopt;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const auto ord = static_cast<std::uint32_t>(i + 1);
    if (auto it = policy.owners.find(ord); it != policy.owners.end()) {
      owners[i] = it->second;
    } else if (parents[i] == 0) {
      owners[i] = group;
    } else if (policy.exhaustive) {
      owners[i] = owners[parents[i] - 1];
    }
  }
  return owners;
}

void validate_policy(const TagOrdinals& tags, const CompositionPolicy& policy, const KeyRing& ring) {
  const KeyRing::Entry& group = ring.group();
  for (const auto& [ord, id] : policy.owners) {
    if (ord > tags.size()) {
      throw Error(Errc::InvalidPolicy, "tag " + std::to_string(ord) + " does not exist (document has " +
                                           std::to_string(tags.size()) + ")");
    }
    if (!ring.find(id)) throw Error(Errc::MissingKey, "no key '" + id + "' for tag " + std::to_string(ord));
  }
  const auto owners = resolve_owners(parents_of(tags), policy, ring);
  if (!owners.empty() && owners[0] != group.id) {
    throw Error(Errc::InvalidPolicy, "the outermost tag must use the group key");
  }
  const bool pairwise = std::any_of(owners.begin(), owners.end(), [&](const auto& o) { return o != group.id; });
  if (!pairwise) return;
  for (std::size_t i = 1; i < owners.size(); ++i) {
    if (owners[i] == group.id) {
      throw Error(Errc::InvalidPolicy, "tag " + std::to_string(i + 1) + " '" + tags.tags[i].name +
                                           "' falls to the group key below the outermost tag");
    }
  }
}

std::vector<std::uint32_t> access_header(const TagOrdinals& tags, const CompositionPolicy& policy,
                                         const KeyRing& ring, std::span<const std::string> recipient_keys) {
  const auto owners = resolve_owners(parents_of(tags), policy, ring);
  const std::string& group = ring.group().id;
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < owners.size(); ++i) {
    if (!owners[i] || *owners[i] == group) continue;
    if (std::find(recipient_keys.begin(), recipient_keys.end(), *owners[i]) != recipient_keys.end()) {
      out.push_back(static_cast<std::uint32_t>(i + 1));
    }
  }
  return out;
}

std::vector<std::string> compose_encrypt(const WordStream& stream, const CompositionPolicy& policy, KeyRing& ring,
                                         Mode mode) {
  validate_stream(stream);
  const TagOrdinals tags = tag_ordinals(stream);
  validate_policy(tags, policy, ring);
  const auto owners = resolve_owners(parents_of(tags), policy, ring);
  std::vector<std::size_t> lane_of_token(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    lane_of_token[i] = *ring.index_of(*owners[tags.owner_of_token[i] - 1]);
  }
  auto lanes = ring.lanes();
  return encode_words(stream, lane_of_token, lanes, mode);
}

Skeleton parse_skeleton(std::span<const std::string> words) {
  Skeleton sk;
  std::vector<std::uint32_t> open;  // stack of ordinals
  bool root_closed = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    WordKind kind;
    try {
      kind = classify_word(words[i]);
    } catch (const Error& e) {
      throw Error(Errc::MalformedMessage, "word " + std::to_string(i) + ": " + e.what());
    }
    if (kind == WordKind::Digest) {
      const bool after_closer = !sk.body.empty() && sk.kinds.back() == WordKind::Closer &&
                                classify_word(words[i - 1]) == WordKind::Closer;
      if (!after_closer) throw Error(Errc::MalformedMessage, "digest at word " + std::to_string(i) + " does not follow a closer");
      sk.digests.emplace_back(sk.tag_of_word.back(), words[i]);
      continue;
    }
    if (root_closed) throw Error(Errc::MalformedMessage, "words after the outermost tag closed");
    const std::size_t index = sk.body.size();
    if (kind == WordKind::Tag) {
      const auto ord = static_cast<std::uint32_t>(sk.parents.size() + 1);
      if (open.empty() && ord != 1) throw Error(Errc::MalformedMessage, "several outermost tags");
      sk.parents.push_back(open.empty() ? 0 : open.back());
      sk.open_index.push_back(index);
      sk.close_index.push_back(0);
      open.push_back(ord);
    } else if (open.empty()) {
      throw Error(Errc::MalformedMessage, "word " + std::to_string(i) + " outside any tag");
    }
    sk.body.push_back(words[i]);
    sk.kinds.push_back(kind);
    sk.tag_of_word.push_back(open.back());
    if (kind == WordKind::Closer) {
      sk.close_index[open.back() - 1] = index;
      open.pop_back();
      root_closed = open.empty();
    }
  }
  if (!open.empty()) throw Error(Errc::MalformedMessage, std::to_string(open.size()) + " tag(s) left open");
  if (sk.body.empty()) throw Error(Errc::MalformedMessage, "empty message");
  return sk;
}

bool PartialDocument::complete() const {
  return std::all_of(words.begin(), words.end(), [](const DecodedWord& w) { return w.token.has_value(); });
}

WordStream PartialDocument::stream() const {
  WordStream out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!words[i].token) throw Error(Errc::MalformedMessage, "word " + std::to_string(i) + " is not readable");
    out.push_back(*words[i].token);
  }
  validate_stream(out);
  return out;
}

std::optional<std::string> PartialDocument::variable_of(std::uint32_t ordinal) const {
  for (const auto& w : words) {
    if (w.tag == ordinal && w.kind == WordKind::Variable && w.token) return w.token->text;
  }
  return std::nullopt;
}

void PartialDocument::set_variable(std::uint32_t ordinal, std::string text) {
  for (auto& w : words) {
    if (w.tag == ordinal && w.kind == WordKind::Variable) {
      if (!w.token) throw Error(Errc::MissingKey, "tag " + std::to_string(ordinal) + " is not readable");
      w.token->text = std::move(text);
      return;
    }
  }
  throw Error(Errc::UnsupportedShape, "tag " + std::to_string(ordinal) + " has no text");
}

PartialDocument compose_decrypt(const EncryptedMessage& msg, KeyRing& held, const CompositionPolicy& view,
                                Mode mode) {
  const Skeleton sk = parse_skeleton(msg.words);
  const auto owners = resolve_owners(sk.parents, view, held);
  std::vector<std::size_t> lane_of_word(sk.body.size(), kOpaqueLane);
  for (std::size_t i = 0; i < sk.body.size(); ++i) {
    const auto& owner = owners[sk.tag_of_word[i] - 1];
    if (owner) {
      if (auto idx = held.index_of(*owner)) lane_of_word[i] = *idx;
    }
  }
  auto lanes = held.lanes();
  auto tokens = decode_words(sk.body, lane_of_word, lanes, mode);

  PartialDocument doc;
  doc.digests = sk.digests;
  doc.words.reserve(sk.body.size());
  for (std::size_t i = 0; i < sk.body.size(); ++i) {
    const auto& owner = owners[sk.tag_of_word[i] - 1];
    const bool readable = lane_of_word[i] != kOpaqueLane;
    doc.words.push_back(DecodedWord{sk.body[i], sk.kinds[i], sk.tag_of_word[i],
                                    readable ? owner : std::nullopt, std::move(tokens[i])});
  }
  return doc;
}

std::vector<std::string> recompose(const PartialDocument& doc, const KeyRing& held) {
  std::vector<std::string> out;
  out.reserve(doc.words.size());
  for (const auto& w : doc.words) {
    if (w.kind == WordKind::Variable && w.token && w.owner) {
      const KeyRing::Entry* e = held.find(*w.owner);
      if (!e) throw Error(Errc::MissingKey, "no key '" + *w.owner + "'");
      out.push_back(encode_word(w.token->text, TokenKind::Variable, e->st));
    } else {
      out.push_back(w.raw);
    }
  }
  return out;
}

std::string sign_segment(std::span<const std::string> segment, const TenElementKey& key, DigestAlgorithm alg) {
  return hex_digest(alg, serialize_key(key) + join_words(segment));
}

std::vector<std::string> attach_digests(std::span<const std::string> body, const CompositionPolicy& policy,
                                        const KeyRing& ring, DigestAlgorithm alg) {
  const Skeleton sk = parse_skeleton(body);
  if (!sk.digests.empty()) throw Error(Errc::MalformedMessage, "body already carries digests");
  const auto owners = resolve_owners(sk.parents, policy, ring);
  const auto roots = ownership_roots(sk.parents, owners);
  std::map<std::uint32_t, std::string> digests;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (!roots[i]) continue;
    const KeyRing::Entry* e = ring.find(*owners[i]);
    if (!e) throw Error(Errc::MissingKey, "no key '" + *owners[i] + "' to sign tag " + std::to_string(i + 1));
    const auto ord = static_cast<std::uint32_t>(i + 1);
    digests[ord] = segment_digest(sk, ord, e->key, alg);
  }
  return interleave(sk, digests);
}

std::vector<std::string> resign(std::span<const std::string> signed_words, std::span<const std::string> new_body,
                                const KeyRing& held, const CompositionPolicy& view, DigestAlgorithm alg) {
  const Skeleton old_sk = parse_skeleton(signed_words);
  const Skeleton sk = parse_skeleton(new_body);
  if (old_sk.parents != sk.parents || old_sk.kinds != sk.kinds) {
    throw Error(Errc::MalformedMessage, "edited body changed the document structure");
  }
  const auto owners = resolve_owners(sk.parents, view, held);
  std::map<std::uint32_t, std::string> digests;
  for (const auto& [ord, old] : old_sk.digests) {
    const auto& owner = owners[ord - 1];
    const KeyRing::Entry* e = owner ? held.find(*owner) : nullptr;
    digests[ord] = e ? segment_digest(sk, ord, e->key, alg) : old;
  }
  return interleave(sk, digests);
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "Accept";
    case Verdict::Reject: return "Reject";
    case Verdict::NotCheckable: return "NotCheckable";
  }
  return "?";
}

bool VerifyReport::accepted() const {
  if (!well_formed || subtrees.empty()) return false;
  return std::none_of(subtrees.begin(), subtrees.end(), [](const SubtreeVerdict& s) { return s.verdict == Verdict::Reject; });
}

std::optional<Verdict> VerifyReport::verdict_for(std::uint32_t ordinal) const {
  for (const auto& s : subtrees) {
    if (s.ordinal == ordinal) return s.verdict;
  }
  return std::nullopt;
}

VerifyReport verify_digests(std::span<const std::string> signed_words, const KeyRing& held,
                            const CompositionPolicy& view, DigestAlgorithm alg) {
  VerifyReport report;
  Skeleton sk;
  try {
    sk = parse_skeleton(signed_words);
  } catch (const Error& e) {
    report.well_formed = false;
    for (const auto& w : signed_words) {
      if (is_digest_word(w)) report.subtrees.push_back({0, std::nullopt, Verdict::Reject, e.what()});
    }
    if (report.subtrees.empty()) report.subtrees.push_back({0, std::nullopt, Verdict::Reject, e.what()});
    return report;
  }

  const auto owners = resolve_owners(sk.parents, view, held);
  const auto roots = ownership_roots(sk.parents, owners);
  std::set<std::uint32_t> seen;
  for (const auto& [ord, digest] : sk.digests) {
    SubtreeVerdict v{ord, owners[ord - 1], Verdict::NotCheckable, {}};
    const KeyRing::Entry* e = v.key_id ? held.find(*v.key_id) : nullptr;
    if (!seen.insert(ord).second) {
      v.verdict = Verdict::Reject;
      v.reason = "second digest for the same tag";
    } else if (!e) {
      v.reason = "key not held";
    } else if (segment_digest(sk, ord, e->key, alg) == digest) {
      v.verdict = Verdict::Accept;
    } else {
      v.verdict = Verdict::Reject;
      v.reason = "digest mismatch";
    }
    report.subtrees.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const auto ord = static_cast<std::uint32_t>(i + 1);
    if (roots[i] && !seen.count(ord) && held.find(*owners[i])) {
      report.subtrees.push_back({ord, owners[i], Verdict::Reject, "missing digest"});
    }
  }
  return report;
}

}  // namespace restcipher
