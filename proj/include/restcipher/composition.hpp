#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "restcipher/codec.hpp"
#include "restcipher/docmodel.hpp"
#include "restcipher/key.hpp"
#include "restcipher/tables.hpp"

namespace restcipher {

enum class DigestAlgorithm { MD5, SHA1, SHA256 };

std::string_view digest_algorithm_name(DigestAlgorithm alg);
std::optional<DigestAlgorithm> digest_algorithm_from_name(std::string_view name);

// Lowercase hex digest of `bytes`.
std::string hex_digest(DigestAlgorithm alg, std::string_view bytes);

// Keys a party holds, each with its own tables. Tag tables are per key, so
// every key is an independent tag-table namespace.
class KeyRing {
 public:
  struct Entry {
    std::string id;
    TenElementKey key;
    bool group;
    SymbolTable st;
    TagTable tat;
    TatContext ctx;
  };

  // Throws InvalidPolicy for a duplicate id or a second group key.
  void add(std::string id, const TenElementKey& key, bool group);

  const Entry* find(std::string_view id) const;
  Entry* find(std::string_view id);
  std::optional<std::size_t> index_of(std::string_view id) const;
  // Throws MissingKey when the ring has no group key.
  const Entry& group() const;
  bool has_group() const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<CodecLane> lanes();

 private:
  std::vector<Entry> entries_;
};

// Which key encrypts which tag. Unlisted tags inherit their parent's key; the
// outermost tag defaults to the group key.
//
// A recipient's view (exhaustive = false) lists only the tags its own keys
// cover, so an unlisted tag below the root is someone else's and stays opaque.
struct CompositionPolicy {
  std::map<std::uint32_t, std::string> owners;
  bool exhaustive = true;

  // "2=K1,3=K2,4=K2"
  static CompositionPolicy parse(std::string_view text);
};

// View for a recipient that received `access` and decrypts those tags with
// its pairwise key `pairwise_id` (empty when it holds only the group key).
CompositionPolicy recipient_view(std::span<const std::uint32_t> access, const std::string& pairwise_id);

// Effective key id per tag (index ordinal - 1); nullopt where the view cannot
// tell. parents[i] is the parent ordinal of tag i + 1 (0 for the root).
std::vector<std::optional<std::string>> resolve_owners(std::span<const std::uint32_t> parents,
                                                       const CompositionPolicy& policy, const KeyRing& ring);

// Checks an exhaustive policy against a document: keys exist, the outermost
// tag uses the group key, ordinals exist, and no inner tag falls to the group
// key while pairwise keys are in play (recipients could not locate it).
void validate_policy(const TagOrdinals& tags, const CompositionPolicy& policy, const KeyRing& ring);

// Ordinals of every tag owned by one of `recipient_keys` other than the group key.
std::vector<std::uint32_t> access_header(const TagOrdinals& tags, const CompositionPolicy& policy,
                                         const KeyRing& ring, std::span<const std::string> recipient_keys);

// Encodes each word with the key of its innermost tag. One body serves all recipients.
std::vector<std::string> compose_encrypt(const WordStream& stream, const CompositionPolicy& policy, KeyRing& ring,
                                         Mode mode);

// Structure recovered from marker words alone, without any key.
struct Skeleton {
  std::vector<std::string> body;          // message words with digests removed
  std::vector<WordKind> kinds;            // per body word
  std::vector<std::uint32_t> tag_of_word; // innermost tag ordinal per body word
  std::vector<std::uint32_t> parents;     // per tag, index ordinal - 1
  std::vector<std::size_t> open_index;    // per tag, into body
  std::vector<std::size_t> close_index;   // per tag, into body
  std::vector<std::pair<std::uint32_t, std::string>> digests;  // (closed tag, digest) in message order

  std::size_t tag_count() const { return parents.size(); }
};

// Throws MalformedMessage for unclassifiable words, unbalanced closers,
// several roots, or digests outside the position right after a closer.
Skeleton parse_skeleton(std::span<const std::string> words);

struct DecodedWord {
  std::string raw;
  WordKind kind;
  std::uint32_t tag;                 // innermost tag ordinal
  std::optional<std::string> owner;  // key id, nullopt when opaque
  std::optional<Token> token;        // set for every word under a held key, and for closers
};

struct PartialDocument {
  std::vector<DecodedWord> words;
  std::vector<std::pair<std::uint32_t, std::string>> digests;

  bool complete() const;
  // Throws MalformedMessage unless complete().
  WordStream stream() const;
  // Decoded variable text of tag `ordinal`, if readable.
  std::optional<std::string> variable_of(std::uint32_t ordinal) const;
  // Replaces the decoded variable text of tag `ordinal`; the tag must be readable.
  void set_variable(std::uint32_t ordinal, std::string text);
};

// Decodes the words whose owner `held` covers under `view`; others stay raw.
PartialDocument compose_decrypt(const EncryptedMessage& msg, KeyRing& held, const CompositionPolicy& view,
                                Mode mode);

// Body words after edits: variable words re-encoded under their owner's key,
// every other word copied verbatim.
std::vector<std::string> recompose(const PartialDocument& doc, const KeyRing& held);

std::string sign_segment(std::span<const std::string> segment, const TenElementKey& key,
                         DigestAlgorithm alg = DigestAlgorithm::MD5);

// Inserts one digest after the closer of every tag whose key differs from its
// parent's (the outermost tag included, so the last word is the
// whole-document digest under the group key).
std::vector<std::string> attach_digests(std::span<const std::string> body, const CompositionPolicy& policy,
                                        const KeyRing& ring, DigestAlgorithm alg = DigestAlgorithm::MD5);

// Replaces the digests `held` can produce over `new_body`; keeps the others
// from `signed_words`, which must have the same skeleton.
std::vector<std::string> resign(std::span<const std::string> signed_words, std::span<const std::string> new_body,
                                const KeyRing& held, const CompositionPolicy& view,
                                DigestAlgorithm alg = DigestAlgorithm::MD5);

enum class Verdict { Accept, Reject, NotCheckable };
std::string_view verdict_name(Verdict v);

struct SubtreeVerdict {
  std::uint32_t ordinal;  // 0 when the message skeleton could not be parsed
  std::optional<std::string> key_id;
  Verdict verdict;
  std::string reason;
};

struct VerifyReport {
  bool well_formed = true;
  std::vector<SubtreeVerdict> subtrees;

  bool accepted() const;
  std::optional<Verdict> verdict_for(std::uint32_t ordinal) const;
};

// Never throws on a tampered body: structural damage yields well_formed =
// false and Reject for every digest present.
VerifyReport verify_digests(std::span<const std::string> signed_words, const KeyRing& held,
                            const CompositionPolicy& view, DigestAlgorithm alg = DigestAlgorithm::MD5);

}  // namespace restcipher
