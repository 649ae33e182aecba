#include "restcipher/keyxchg.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "restcipher/error.hpp"

namespace restcipher {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) return out;
    start = tab + 1;
  }
}

}  // namespace

std::string_view role_name(KeyRole role) { return role == KeyRole::Group ? "group" : "pairwise"; }

std::optional<KeyRole> role_from_name(std::string_view name) {
  if (name == "pairwise") return KeyRole::Pairwise;
  if (name == "group") return KeyRole::Group;
  return std::nullopt;
}

KeyStore::KeyStore(const KeyStore& other) : records_(other.records()) {}

KeyStore& KeyStore::operator=(const KeyStore& other) {
  if (this == &other) return *this;
  auto copy = other.records();
  std::lock_guard lock(mu_);
  records_ = std::move(copy);
  return *this;
}

void KeyStore::put(KeyRecord record) {
  std::lock_guard lock(mu_);
  for (auto& r : records_) {
    if (r.peer == record.peer && r.key_id == record.key_id) {
      r = std::move(record);
      return;
    }
  }
  records_.push_back(std::move(record));
}

std::optional<KeyRecord> KeyStore::get(std::string_view peer, std::string_view key_id) const {
  std::lock_guard lock(mu_);
  for (const auto& r : records_) {
    if (r.peer == peer && r.key_id == key_id) return r;
  }
  return std::nullopt;
}

bool KeyStore::erase(std::string_view peer, std::string_view key_id) {
  std::lock_guard lock(mu_);
  auto it = std::find_if(records_.begin(), records_.end(),
                         [&](const KeyRecord& r) { return r.peer == peer && r.key_id == key_id; });
  if (it == records_.end()) return false;
  records_.erase(it);
  return true;
}

std::vector<KeyRecord> KeyStore::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<KeyRecord> KeyStore::records_for(std::string_view peer) const {
  std::lock_guard lock(mu_);
  std::vector<KeyRecord> out;
  for (const auto& r : records_) {
    if (r.peer == peer) out.push_back(r);
  }
  return out;
}

std::size_t KeyStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::string KeyStore::serialize() const {
  std::string out;
  for (const auto& r : records()) {
    out += r.peer;
    out += '\t';
    out += r.key_id;
    out += '\t';
    out += role_name(r.role);
    out += '\t';
    out += serialize_key(r.key);
    out += '\n';
  }
  return out;
}

KeyStore KeyStore::parse(std::string_view text) {
  KeyStore store;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    if (nl == std::string_view::npos) {
      throw Error(Errc::Corrupt, "line " + std::to_string(line_no) + ": missing line terminator");
    }
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl + 1);
    const auto fields = split_tabs(line);
    const auto fail = [&](const std::string& why) {
      return Error(Errc::Corrupt, "line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 4) throw fail("expected 4 tab-separated fields, found " + std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty()) throw fail("empty peer or key id");
    const auto role = role_from_name(fields[2]);
    if (!role) throw fail("unknown role '" + std::string(fields[2]) + "'");
    KeyRecord rec{std::string(fields[0]), std::string(fields[1]), *role, {}};
    try {
      rec.key = parse_key(fields[3]);
    } catch (const Error& e) {
      throw fail(e.what());
    }
    if (store.get(rec.peer, rec.key_id)) throw fail("duplicate record for " + rec.peer + "/" + rec.key_id);
    store.put(std::move(rec));
  }
  return store;
}

void KeyStore::save(const std::filesystem::path& path) const {
  const std::string text = serialize();
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(Errc::StoreFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::StoreFailure, "cannot replace " + path.string() + ": " + ec.message());
}

KeyStore KeyStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool operator==(const KeyStore& a, const KeyStore& b) { return a.records() == b.records(); }

KeyManager::KeyManager(KeyStore& store, KeyBounds bounds, std::uint64_t seed)
    : store_(store), bounds_(bounds), rng_(seed) {}

std::optional<std::string> KeyManager::handle_key_request(std::string_view body, const std::string& peer,
                                                          const std::string& key_id) {
  if (body != kGetKeyCommand) return std::nullopt;
  TenElementKey key;
  {
    std::lock_guard lock(rng_mu_);
    key = generate_key(bounds_, rng_);
  }
  try {
    store_.put(KeyRecord{peer, key_id, KeyRole::Pairwise, key});
  } catch (const std::exception& e) {
    throw Error(Errc::StoreFailure, e.what());
  }
  return serialize_key(key);
}

TenElementKey request_key(const std::string& host, int port, const std::string& path, KeyStore& store,
                          const std::string& server_id, const std::string& key_id, KeyRole role) {
  httplib::Client client(host, port);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  auto res = client.Post(path, std::string(kGetKeyCommand), "text/plain");
  if (!res) {
    throw Error(Errc::Transport, host + ":" + std::to_string(port) + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(Errc::Transport, path + ": HTTP " + std::to_string(res->status) + " " + res->body);
  }
  TenElementKey key;
  try {
    key = parse_key(res->body);
  } catch (const Error& e) {
    throw Error(Errc::Malformed, std::string("key response: ") + e.what());
  }
  store.put(KeyRecord{server_id, key_id, role, key});
  return key;
}

}  // namespace restcipher
