#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "restcipher/key.hpp"

namespace restcipher {

inline constexpr std::string_view kGetKeyCommand = "Get key";

enum class KeyRole { Pairwise, Group };

std::string_view role_name(KeyRole role);
std::optional<KeyRole> role_from_name(std::string_view name);

struct KeyRecord {
  std::string peer;
  std::string key_id;
  KeyRole role = KeyRole::Pairwise;
  TenElementKey key;

  friend bool operator==(const KeyRecord&, const KeyRecord&) = default;
};

// Records keyed by (peer, key id). All members are safe to call concurrently.
class KeyStore {
 public:
  KeyStore() = default;
  KeyStore(const KeyStore& other);
  KeyStore& operator=(const KeyStore& other);

  // Inserts or replaces the record with the same (peer, key id).
  void put(KeyRecord record);
  std::optional<KeyRecord> get(std::string_view peer, std::string_view key_id) const;
  bool erase(std::string_view peer, std::string_view key_id);
  std::vector<KeyRecord> records() const;
  std::vector<KeyRecord> records_for(std::string_view peer) const;
  std::size_t size() const;

  // One record per line: peer TAB key-id TAB role TAB key, LF terminated.
  std::string serialize() const;
  // Throws Corrupt naming the offending line.
  static KeyStore parse(std::string_view text);

  // Throws Io / StoreFailure.
  void save(const std::filesystem::path& path) const;
  // A missing file is an Io error; an empty file is an empty store.
  static KeyStore load(const std::filesystem::path& path);

  friend bool operator==(const KeyStore& a, const KeyStore& b);

 private:
  mutable std::mutex mu_;
  std::vector<KeyRecord> records_;
};

// Server side of the exchange: answers "Get key" with a fresh key stored
// against the requesting peer.
class KeyManager {
 public:
  KeyManager(KeyStore& store, KeyBounds bounds, std::uint64_t seed);

  // Serialized key when `body` is exactly the command, nullopt otherwise.
  // A repeated request from the same peer replaces the earlier key.
  std::optional<std::string> handle_key_request(std::string_view body, const std::string& peer,
                                                const std::string& key_id = "session");

  KeyStore& store() { return store_; }

 private:
  KeyStore& store_;
  KeyBounds bounds_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

// Client side: POSTs the command to http://host:port + path and stores the
// returned key under (server_id, key_id). Nothing is stored on failure.
// Throws Transport (unreachable, non-200) or Malformed (body is not a key).
TenElementKey request_key(const std::string& host, int port, const std::string& path, KeyStore& store,
                          const std::string& server_id, const std::string& key_id = "session",
                          KeyRole role = KeyRole::Pairwise);

}  // namespace restcipher
