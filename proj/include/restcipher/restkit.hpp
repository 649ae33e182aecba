#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "restcipher/codec.hpp"
#include "restcipher/composition.hpp"
#include "restcipher/docmodel.hpp"
#include "restcipher/key.hpp"
#include "restcipher/keyxchg.hpp"

namespace restcipher {

// One HTTP body crossing the wire.
struct WireRecord {
  std::string from;
  std::string to;
  std::string method;  // "POST", "GET", or "RESPONSE <status>"
  std::string uri;
  std::string body;

  // "from->to<TAB>method uri<TAB>body"
  std::string line() const;
  static WireRecord parse_line(std::string_view line);

  friend bool operator==(const WireRecord&, const WireRecord&) = default;
};

class Transcript {
 public:
  void add(WireRecord record);
  std::vector<WireRecord> records() const;
  std::string text() const;

 private:
  mutable std::mutex mu_;
  std::vector<WireRecord> records_;
};

// Throws unless `body` is empty, the key command, a serialized key, a plain
// error line, or an encrypted (optionally signed) message.
void check_wire_body(std::string_view body);

// Serves encrypted resources at /<peer-id>/<resource>.
//   POST "Get key"           new pairwise key for the peer (session reset)
//   POST "Get key" to /<peer-id>/group-key   the group key, if one is set
//   GET                      STBE on first contact, TATBE afterwards
//   POST with empty body     STBE representation
// A peer without a key gets 409 "no session key".
class ResourceServer {
 public:
  ResourceServer(std::string id, KeyBounds bounds, std::uint64_t seed);
  ~ResourceServer();
  ResourceServer(const ResourceServer&) = delete;
  ResourceServer& operator=(const ResourceServer&) = delete;

  void add_resource(const std::string& name, WordStream document);
  void set_group_key(const std::string& key_id, const TenElementKey& key);

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws Bind.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop() from elsewhere.
  void listen(const std::string& host, int port);
  void stop();
  int port() const;
  const std::string& id() const { return id_; }

  KeyStore& store() { return store_; }

 private:
  struct Impl;
  std::string id_;
  KeyStore store_;
  std::unique_ptr<Impl> impl_;
};

// Talks to a ResourceServer as `self_id`, keeping the matching codec session.
class ResourceClient {
 public:
  ResourceClient(std::string self_id, std::string host, int port, std::string server_id = "server",
                 Transcript* transcript = nullptr);

  // Throws Transport / Malformed.
  TenElementKey obtain_key();
  // Decoded document. Throws Transport for non-200 answers.
  WordStream get(const std::string& resource);
  WordStream post_empty(const std::string& resource);

  const std::string& last_body() const { return last_body_; }
  const std::optional<CodecSession>& session() const { return session_; }
  KeyStore& store() { return store_; }

 private:
  WordStream fetch(const std::string& method, const std::string& resource);

  std::string self_id_;
  std::string host_;
  int port_;
  std::string server_id_;
  Transcript* transcript_;
  KeyStore store_;
  std::optional<CodecSession> session_;
  bool contacted_ = false;
  std::string last_body_;
};

struct IntermediaryConfig {
  std::string id;      // participant name, e.g. "SP1"
  std::string key_id;  // its pairwise key id in the policy, e.g. "K1"
  std::map<std::uint32_t, std::string> edits;  // new text per tag ordinal
  std::optional<std::uint32_t> tamper_tag;     // alters this tag's words without holding its key
};

struct ScenarioConfig {
  WordStream document;
  CompositionPolicy policy;
  std::string server_id = "S";
  std::string group_key_id = "K3";
  std::vector<IntermediaryConfig> intermediaries;
  Mode mode = Mode::ST;
  int rounds = 1;
  DigestAlgorithm algorithm = DigestAlgorithm::MD5;
  // When false, fixed_keys supplies every key id instead of the HTTP exchange.
  bool exchange_keys = true;
  std::map<std::string, TenElementKey> fixed_keys;
  KeyBounds bounds;
  std::uint64_t seed = 1;
  std::string host = "127.0.0.1";

  // XML2 with S, SP1 (tag 2 under K1) and SP2 (tags 3-4 under K2).
  static ScenarioConfig three_party();
};

struct ScenarioResult {
  std::vector<WireRecord> transcript;
  bool completed = false;
  std::string halted_reason;
  std::optional<std::uint32_t> rejected_tag;
  std::string rejected_from;  // intermediary whose reply failed verification
  std::vector<std::pair<std::string, VerifyReport>> reports;
  WordStream expected_document;
  WordStream final_document;
};

// Runs the pipeline over loopback: every participant is its own HTTP server.
// A verification failure halts the run and is recorded, not thrown.
ScenarioResult run_composition_scenario(const ScenarioConfig& config);

}  // namespace restcipher
