#include "restcipher/restkit.hpp"

#include <httplib.h>

#include <thread>

#include "restcipher/error.hpp"

namespace restcipher {

namespace {

constexpr std::string_view kTextPlain = "text/plain";

// "/<peer>/<resource>" -> {peer, resource}
std::optional<std::pair<std::string, std::string>> split_uri(std::string_view path) {
  if (path.empty() || path.front() != '/') return std::nullopt;
  path.remove_prefix(1);
  const std::size_t slash = path.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 >= path.size()) return std::nullopt;
  const std::string_view rest = path.substr(slash + 1);
  if (rest.find('/') != std::string_view::npos) return std::nullopt;
  return std::make_pair(std::string(path.substr(0, slash)), std::string(rest));
}

void reply(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, std::string(kTextPlain));
}

std::string error_body(const std::exception& e) { return std::string("error: ") + e.what(); }

WordStream with_edits(WordStream doc, const std::map<std::uint32_t, std::string>& edits) {
  const TagOrdinals tags = tag_ordinals(doc);
  for (const auto& [ord, text] : edits) {
    bool done = false;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (doc[i].kind == TokenKind::Variable && tags.owner_of_token[i] == ord) {
        doc[i].text = text;
        done = true;
        break;
      }
    }
    if (!done) throw Error(Errc::UnsupportedShape, "tag " + std::to_string(ord) + " has no text to edit");
  }
  return doc;
}

// Changes one digit of the first variable word of `ordinal` in place.
void tamper(std::vector<std::string>& body, std::uint32_t ordinal) {
  const Skeleton sk = parse_skeleton(body);
  for (std::size_t i = 0; i < sk.body.size(); ++i) {
    if (sk.tag_of_word[i] != ordinal || sk.kinds[i] != WordKind::Variable) continue;
    char& c = body[i].back();
    c = c == '9' ? '8' : static_cast<char>(c + 1);
    return;
  }
  throw Error(Errc::UnsupportedShape, "tag " + std::to_string(ordinal) + " has no variable word");
}

// An intermediary: decodes the tags its keys cover, applies its edits,
// re-signs what it can and answers with the updated message.
class IntermediaryServer {
 public:
  IntermediaryServer(const IntermediaryConfig& cfg, KeyRing ring, Mode mode, DigestAlgorithm alg)
      : cfg_(cfg), ring_(std::move(ring)), mode_(mode), alg_(alg) {
    server_.Post(R"(/([^/]+)/compose)", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      try {
        reply(res, 200, process(req.body));
      } catch (const std::exception& e) {
        reply(res, 400, error_body(e));
      }
    });
  }

  ~IntermediaryServer() { stop(); }

  int start(const std::string& host) {
    const int port = server_.bind_to_any_port(host);
    if (port <= 0) throw Error(Errc::Bind, "cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  std::string process(const std::string& body) {
    const EncryptedMessage msg = EncryptedMessage::parse(body);
    const CompositionPolicy view = recipient_view(msg.access, cfg_.key_id);
    const VerifyReport inbound = verify_digests(msg.words, ring_, view, alg_);
    if (!inbound.accepted()) throw Error(Errc::VerificationFailed, "inbound message rejected");
    PartialDocument doc = compose_decrypt(msg, ring_, view, mode_);
    for (const auto& [ord, text] : cfg_.edits) {
      if (std::find(msg.access.begin(), msg.access.end(), ord) != msg.access.end()) doc.set_variable(ord, text);
    }
    std::vector<std::string> new_body = recompose(doc, ring_);
    if (cfg_.tamper_tag) tamper(new_body, *cfg_.tamper_tag);
    return EncryptedMessage{msg.access, resign(msg.words, new_body, ring_, view, alg_)}.serialize();
  }

  IntermediaryConfig cfg_;
  KeyRing ring_;
  Mode mode_;
  DigestAlgorithm alg_;
  std::mutex mu_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace

std::string WireRecord::line() const { return from + "->" + to + "\t" + method + " " + uri + "\t" + body; }

WireRecord WireRecord::parse_line(std::string_view line) {
  const std::size_t t1 = line.find('\t');
  const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
  if (t2 == std::string_view::npos) throw Error(Errc::Malformed, "transcript line needs three fields");
  const std::string_view ends = line.substr(0, t1);
  const std::string_view request = line.substr(t1 + 1, t2 - t1 - 1);
  const std::size_t arrow = ends.find("->");
  const std::size_t space = request.rfind(' ');
  if (arrow == std::string_view::npos || space == std::string_view::npos) {
    throw Error(Errc::Malformed, "transcript line header '" + std::string(line.substr(0, t2)) + "'");
  }
  return {std::string(ends.substr(0, arrow)), std::string(ends.substr(arrow + 2)),
          std::string(request.substr(0, space)), std::string(request.substr(space + 1)),
          std::string(line.substr(t2 + 1))};
}

void Transcript::add(WireRecord record) {
  std::lock_guard lock(mu_);
  records_.push_back(std::move(record));
}

std::vector<WireRecord> Transcript::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::string Transcript::text() const {
  std::string out;
  for (const auto& r : records()) out += r.line() + "\n";
  return out;
}

void check_wire_body(std::string_view body) {
  if (body.empty() || body == kGetKeyCommand || body.rfind("error: ", 0) == 0) return;
  if (body.front() == '[') {
    parse_key(body);
    return;
  }
  const EncryptedMessage msg = EncryptedMessage::parse(body);
  parse_skeleton(msg.words);
}

struct ResourceServer::Impl {
  struct Session {
    std::mutex mu;
    CodecSession codec;
    bool contacted = false;
    explicit Session(const TenElementKey& key) : codec(key) {}
  };

  Impl(ResourceServer& owner, KeyBounds bounds, std::uint64_t seed) : keys(owner.store_, bounds, seed) {}

  std::shared_ptr<Session> session(const std::string& peer) {
    std::lock_guard lock(mu);
    auto it = sessions.find(peer);
    return it == sessions.end() ? nullptr : it->second;
  }

  KeyManager keys;
  std::mutex mu;
  std::map<std::string, WordStream> resources;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::optional<std::pair<std::string, TenElementKey>> group;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

ResourceServer::ResourceServer(std::string id, KeyBounds bounds, std::uint64_t seed)
    : id_(std::move(id)), impl_(std::make_unique<Impl>(*this, bounds, seed)) {
  Impl& im = *impl_;

  im.server.Post(R"(/([^/]+)/([^/]+))", [this, &im](const httplib::Request& req, httplib::Response& res) {
    const auto parts = split_uri(req.path);
    if (!parts) return reply(res, 400, "error: BadRequest: expected /<peer-id>/<resource>");
    const auto& [peer, resource] = *parts;
    try {
      if (req.body == kGetKeyCommand && resource == "group-key") {
        std::lock_guard lock(im.mu);
        if (!im.group) return reply(res, 404, "error: MissingKey: no group key");
        store_.put(KeyRecord{peer, im.group->first, KeyRole::Group, im.group->second});
        return reply(res, 200, serialize_key(im.group->second));
      }
      if (auto key = im.keys.handle_key_request(req.body, peer)) {
        std::lock_guard lock(im.mu);
        im.sessions[peer] = std::make_shared<Impl::Session>(parse_key(*key));
        return reply(res, 200, *key);
      }
      if (!req.body.empty()) return reply(res, 400, "error: BadRequest: unsupported request body");
      auto s = im.session(peer);
      if (!s) return reply(res, 409, "no session key");
      WordStream doc;
      {
        std::lock_guard lock(im.mu);
        auto it = im.resources.find(resource);
        if (it == im.resources.end()) return reply(res, 404, "error: BadRequest: no resource " + resource);
        doc = it->second;
      }
      std::lock_guard lock(s->mu);
      auto msg = stbe(doc, s->codec.st, s->codec.tat, s->codec.ctx);
      s->contacted = true;
      reply(res, 200, msg.serialize());
    } catch (const std::exception& e) {
      reply(res, 500, error_body(e));
    }
  });

  im.server.Get(R"(/([^/]+)/([^/]+))", [&im](const httplib::Request& req, httplib::Response& res) {
    const auto parts = split_uri(req.path);
    if (!parts) return reply(res, 400, "error: BadRequest: expected /<peer-id>/<resource>");
    const auto& [peer, resource] = *parts;
    auto s = im.session(peer);
    if (!s) return reply(res, 409, "no session key");
    WordStream doc;
    {
      std::lock_guard lock(im.mu);
      auto it = im.resources.find(resource);
      if (it == im.resources.end()) return reply(res, 404, "error: BadRequest: no resource " + resource);
      doc = it->second;
    }
    try {
      std::lock_guard lock(s->mu);
      auto& c = s->codec;
      auto msg = s->contacted ? tatbe(doc, c.st, c.tat, c.ctx) : stbe(doc, c.st, c.tat, c.ctx);
      s->contacted = true;
      reply(res, 200, msg.serialize());
    } catch (const std::exception& e) {
      reply(res, 500, error_body(e));
    }
  });
}

ResourceServer::~ResourceServer() { stop(); }

void ResourceServer::add_resource(const std::string& name, WordStream document) {
  validate_stream(document);
  std::lock_guard lock(impl_->mu);
  impl_->resources[name] = std::move(document);
}

void ResourceServer::set_group_key(const std::string& key_id, const TenElementKey& key) {
  std::lock_guard lock(impl_->mu);
  impl_->group = std::make_pair(key_id, key);
}

int ResourceServer::start(const std::string& host, int port) {
  Impl& im = *impl_;
  if (port == 0) {
    im.port = im.server.bind_to_any_port(host);
  } else {
    im.port = im.server.bind_to_port(host, port) ? port : -1;
  }
  if (im.port <= 0) throw Error(Errc::Bind, "cannot bind " + host + ":" + std::to_string(port));
  im.thread = std::thread([&im] { im.server.listen_after_bind(); });
  im.server.wait_until_ready();
  return im.port;
}

void ResourceServer::listen(const std::string& host, int port) {
  Impl& im = *impl_;
  if (!im.server.bind_to_port(host, port)) throw Error(Errc::Bind, "cannot bind " + host + ":" + std::to_string(port));
  im.port = port;
  im.server.listen_after_bind();
}

void ResourceServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ResourceServer::port() const { return impl_->port; }

ResourceClient::ResourceClient(std::string self_id, std::string host, int port, std::string server_id,
                               Transcript* transcript)
    : self_id_(std::move(self_id)),
      host_(std::move(host)),
      port_(port),
      server_id_(std::move(server_id)),
      transcript_(transcript) {}

TenElementKey ResourceClient::obtain_key() {
  const std::string uri = "/" + self_id_ + "/key";
  if (transcript_) transcript_->add({self_id_, server_id_, "POST", uri, std::string(kGetKeyCommand)});
  const TenElementKey key = request_key(host_, port_, uri, store_, server_id_);
  if (transcript_) transcript_->add({server_id_, self_id_, "RESPONSE 200", uri, serialize_key(key)});
  session_.emplace(key);
  contacted_ = false;
  return key;
}

WordStream ResourceClient::get(const std::string& resource) { return fetch("GET", resource); }

WordStream ResourceClient::post_empty(const std::string& resource) { return fetch("POST", resource); }

WordStream ResourceClient::fetch(const std::string& method, const std::string& resource) {
  const std::string uri = "/" + self_id_ + "/" + resource;
  httplib::Client client(host_, port_);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  if (transcript_) transcript_->add({self_id_, server_id_, method, uri, ""});
  auto res = method == "GET" ? client.Get(uri) : client.Post(uri, "", std::string(kTextPlain));
  if (!res) throw Error(Errc::Transport, uri + ": " + httplib::to_string(res.error()));
  last_body_ = res->body;
  if (transcript_) {
    transcript_->add({server_id_, self_id_, "RESPONSE " + std::to_string(res->status), uri, res->body});
  }
  if (res->status != 200) throw Error(Errc::Transport, uri + ": HTTP " + std::to_string(res->status) + " " + res->body);
  if (!session_) throw Error(Errc::MissingKey, "no session key");
  const EncryptedMessage msg = EncryptedMessage::parse(res->body);
  auto& s = *session_;
  // The server answers STBE on first contact and to every empty POST.
  const bool st_form = !contacted_ || method == "POST";
  contacted_ = true;
  return st_form ? stbd(msg, s.st, s.tat, s.ctx) : tatbd(msg, s.st, s.tat, s.ctx);
}

ScenarioConfig ScenarioConfig::three_party() {
  ScenarioConfig cfg;
  cfg.document = parse_xml(R"(<root attr1="value1" attr2="value2"><name>iiti</name><value>2</value><nv>a1</nv></root>)");
  cfg.policy = CompositionPolicy::parse("2=K1,3=K2,4=K2");
  cfg.intermediaries = {
      {"SP1", "K1", {{2, "ravi"}}, std::nullopt},
      {"SP2", "K2", {{3, "7"}, {4, "b2"}}, std::nullopt},
  };
  // Keys drawn from arrangements holding all four character classes.
  cfg.bounds.set(5, 40, 63);
  cfg.fixed_keys = {
      {"K1", parse_key("[12,6,1,1,1,14,4,1,3,2]")},
      {"K2", parse_key("[6,12,1,0,1,14,3,1,3,2]")},
      {"K3", parse_key("[7,10,0,0,1,14,3,0,3,2]")},
  };
  return cfg;
}

ScenarioResult run_composition_scenario(const ScenarioConfig& config) {
  ScenarioResult result;
  Transcript transcript;
  validate_stream(config.document);
  if (config.rounds < 1) throw Error(Errc::InvalidPolicy, "rounds must be positive");
  for (const auto& [ord, id] : config.policy.owners) {
    const bool declared = id == config.group_key_id ||
                          std::any_of(config.intermediaries.begin(), config.intermediaries.end(),
                                      [&](const IntermediaryConfig& i) { return i.key_id == id; });
    if (!declared) throw Error(Errc::MissingKey, "policy names undeclared key '" + id + "' for tag " + std::to_string(ord));
  }

  std::map<std::uint32_t, std::string> all_edits;
  for (const auto& sp : config.intermediaries) {
    for (const auto& [ord, text] : sp.edits) all_edits[ord] = text;
  }
  result.expected_document = with_edits(config.document, all_edits);

  // Key material: S generates the group key; each intermediary asks S for a
  // pairwise key and for the group key.
  ResourceServer server(config.server_id, config.bounds, config.seed);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto fixed = [&](const std::string& id) {
    auto it = config.fixed_keys.find(id);
    if (it == config.fixed_keys.end()) throw Error(Errc::MissingKey, "no fixed key '" + id + "'");
    return it->second;
  };
  const TenElementKey group = config.exchange_keys ? generate_key(config.bounds, rng) : fixed(config.group_key_id);
  server.set_group_key(config.group_key_id, group);
  const int server_port = server.start(config.host, 0);

  KeyRing s_ring;
  s_ring.add(config.group_key_id, group, true);
  std::vector<KeyRing> sp_rings;
  for (const auto& sp : config.intermediaries) {
    KeyRing ring;
    TenElementKey pairwise, sp_group;
    if (config.exchange_keys) {
      KeyStore sp_store;
      const std::string key_uri = "/" + sp.id + "/key";
      const std::string group_uri = "/" + sp.id + "/group-key";
      transcript.add({sp.id, config.server_id, "POST", key_uri, std::string(kGetKeyCommand)});
      pairwise = request_key(config.host, server_port, key_uri, sp_store, config.server_id, sp.key_id);
      transcript.add({config.server_id, sp.id, "RESPONSE 200", key_uri, serialize_key(pairwise)});
      transcript.add({sp.id, config.server_id, "POST", group_uri, std::string(kGetKeyCommand)});
      sp_group = request_key(config.host, server_port, group_uri, sp_store, config.server_id, config.group_key_id,
                             KeyRole::Group);
      transcript.add({config.server_id, sp.id, "RESPONSE 200", group_uri, serialize_key(sp_group)});
      const auto stored = server.store().get(sp.id, "session");
      if (!stored || stored->key != pairwise) throw Error(Errc::VerificationFailed, "key exchange with " + sp.id + " disagrees");
    } else {
      pairwise = fixed(sp.key_id);
      sp_group = group;
    }
    s_ring.add(sp.key_id, pairwise, false);
    ring.add(config.group_key_id, sp_group, true);
    ring.add(sp.key_id, pairwise, false);
    sp_rings.push_back(std::move(ring));
  }

  std::vector<std::unique_ptr<IntermediaryServer>> sps;
  std::vector<int> sp_ports;
  for (std::size_t i = 0; i < config.intermediaries.size(); ++i) {
    sps.push_back(std::make_unique<IntermediaryServer>(config.intermediaries[i], std::move(sp_rings[i]), config.mode,
                                                       config.algorithm));
    sp_ports.push_back(sps.back()->start(config.host));
  }

  const TagOrdinals tags = tag_ordinals(config.document);
  for (int round = 0; round < config.rounds && result.halted_reason.empty(); ++round) {
    KeyRing reader = s_ring;  // S's tables as they stand before this message
    const auto body = compose_encrypt(config.document, config.policy, s_ring, config.mode);
    std::vector<std::string> current = attach_digests(body, config.policy, s_ring, config.algorithm);

    for (std::size_t i = 0; i < config.intermediaries.size(); ++i) {
      const auto& sp = config.intermediaries[i];
      const std::vector<std::string> keys{sp.key_id};
      const EncryptedMessage out{access_header(tags, config.policy, s_ring, keys), current};
      const std::string uri = "/" + config.server_id + "/compose";
      transcript.add({config.server_id, sp.id, "POST", uri, out.serialize()});
      httplib::Client client(config.host, sp_ports[i]);
      client.set_read_timeout(10);
      auto res = client.Post(uri, out.serialize(), std::string(kTextPlain));
      if (!res) throw Error(Errc::Transport, sp.id + ": " + httplib::to_string(res.error()));
      transcript.add({sp.id, config.server_id, "RESPONSE " + std::to_string(res->status), uri, res->body});
      if (res->status != 200) {
        result.halted_reason = sp.id + " failed: " + res->body;
        break;
      }
      const EncryptedMessage back = EncryptedMessage::parse(res->body);
      VerifyReport report = verify_digests(back.words, s_ring, config.policy, config.algorithm);
      const bool ok = report.accepted();
      if (!ok) {
        result.rejected_from = sp.id;
        for (const auto& v : report.subtrees) {
          if (v.verdict == Verdict::Reject) {
            result.rejected_tag = v.ordinal;
            break;
          }
        }
        result.halted_reason = "reply from " + sp.id + " rejected at tag " +
                               std::to_string(result.rejected_tag.value_or(0));
      }
      result.reports.emplace_back(sp.id, std::move(report));
      if (!ok) break;
      current = back.words;
    }
    if (!result.halted_reason.empty()) break;

    const PartialDocument doc = compose_decrypt(EncryptedMessage{{1}, current}, reader, config.policy, config.mode);
    result.final_document = doc.stream();
  }
  result.completed = result.halted_reason.empty();

  for (auto& sp : sps) sp->stop();
  server.stop();
  result.transcript = transcript.records();
  return result;
}

}  // namespace restcipher
