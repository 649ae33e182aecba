#include "restcipher/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "restcipher/codec.hpp"
#include "restcipher/corpus.hpp"
#include "restcipher/error.hpp"
#include "restcipher/restkit.hpp"

namespace restcipher {

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRejected = 3;

std::string read_input(const std::string& path, std::istream& in) {
  std::ostringstream buf;
  if (path.empty() || path == "-") {
    buf << in.rdbuf();
    return buf.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot read " + path);
  buf << f.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::Io, "cannot write " + path);
  f << text;
  if (!f) throw Error(Errc::Io, "short write to " + path);
}

std::string trim_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

Mode mode_from(const std::string& name) {
  if (name == "st") return Mode::ST;
  if (name == "tat") return Mode::TAT;
  throw Error(Errc::Malformed, "mode must be st or tat");
}

DigestAlgorithm algorithm_from(const std::string& name) {
  auto alg = digest_algorithm_from_name(name);
  if (!alg) throw Error(Errc::Malformed, "digest must be md5, sha1 or sha256");
  return *alg;
}

WordStream parse_document(const std::string& text, const std::string& format) {
  std::string f = format;
  if (f.empty()) {
    const auto pos = text.find_first_not_of(" \t\r\n");
    f = pos != std::string::npos && text[pos] == '<' ? "xml" : "json";
  }
  if (f == "xml") return parse_xml(text);
  if (f == "json") return parse_json(text);
  throw Error(Errc::Malformed, "format must be xml or json");
}

std::string emit_document(const WordStream& stream, const std::string& format) {
  if (format.empty() || format == "xml") return emit_xml(stream);
  if (format == "json") return emit_json(stream);
  throw Error(Errc::Malformed, "format must be xml or json");
}

std::vector<std::uint32_t> parse_access(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::string_view s = text;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const std::string_view item = s.substr(0, comma);
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || v == 0) {
      throw Error(Errc::Malformed, "bad access list '" + text + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

// Tag-table state lives next to the session; a missing file is an empty table.
TagTable load_state(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream f(path, std::ios::binary);
  if (!f) return {};
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_tat(buf.str());
}

void save_state(const std::string& path, const TagTable& tat) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::Io, "cannot write " + path);
  f << dump_tat(tat);
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

struct BenchRow {
  std::string name;
  StreamCounts counts;
  std::size_t original = 0, stbe = 0, tatbe = 0;
};

BenchRow bench_one(const std::string& name, const WordStream& doc, const TenElementKey& key) {
  CodecSession s(key);
  BenchRow row{name, count_stream(doc), emit_xml(doc).size(), 0, 0};
  row.stbe = stbe(doc, s.st, s.tat, s.ctx).serialize().size();
  row.tatbe = tatbe(doc, s.st, s.tat, s.ctx).serialize().size();
  return row;
}

void print_bench(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << pad("document", 24) << pad("nonvar_chars", 14) << pad("var_chars", 11) << pad("original", 10)
      << pad("stbe", 8) << pad("tatbe", 8) << "tatbe/stbe\n";
  for (const auto& r : rows) {
    std::ostringstream ratio;
    ratio << std::fixed << std::setprecision(3) << static_cast<double>(r.tatbe) / static_cast<double>(r.stbe);
    out << pad(r.name, 24) << pad(std::to_string(r.counts.non_variable_chars), 14)
        << pad(std::to_string(r.counts.variable_chars), 11) << pad(std::to_string(r.original), 10)
        << pad(std::to_string(r.stbe), 8) << pad(std::to_string(r.tatbe), 8) << ratio.str() << "\n";
  }
}

}  // namespace

std::string dump_tat(const TagTable& tat) {
  std::string out;
  for (const auto& e : tat.entries()) {
    out += kind_name(e.kind);
    out += '\t';
    out += e.word;
    out += '\t';
    out += std::to_string(e.code);
    out += '\n';
  }
  return out;
}

TagTable parse_tat(std::string_view text) {
  TagTable tat;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    const auto fail = [&](const std::string& why) {
      return Error(Errc::Corrupt, "state line " + std::to_string(line_no) + ": " + why);
    };
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw fail("expected kind, word and code");
    const auto kind = kind_from_name(line.substr(0, t1));
    if (!kind) throw fail("unknown kind '" + std::string(line.substr(0, t1)) + "'");
    const std::string_view word = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string_view code_text = line.substr(t2 + 1);
    std::uint64_t code = 0;
    auto [p, ec] = std::from_chars(code_text.data(), code_text.data() + code_text.size(), code);
    if (word.empty() || ec != std::errc() || p != code_text.data() + code_text.size() || code == 0) {
      throw fail("bad word or code");
    }
    try {
      tat.insert(std::string(word), code, *kind);
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  return tat;
}

KeyRing ring_from_store(const KeyStore& store) {
  KeyRing ring;
  for (const auto& r : store.records()) {
    if (const auto* existing = ring.find(r.key_id)) {
      if (existing->key != r.key) throw Error(Errc::Corrupt, "key id '" + r.key_id + "' names two keys");
      continue;
    }
    ring.add(r.key_id, r.key, r.role == KeyRole::Group);
  }
  return ring;
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Table-driven message-level encryption for XML/JSON payloads", "restcipher"};
  app.require_subcommand(1);

  std::string key_text, in_path, out_path, format, mode_name = "st", state_path, access_text = "1";
  std::string keyring_path, policy_text, alg_name = "md5", view_key, recipient;
  std::uint64_t seed = 0;
  bool seeded = false;

  auto* keygen = app.add_subcommand("keygen", "Generate a random valid key");
  std::vector<std::string> bound_specs;
  std::string store_path, peer, key_id = "session";
  bool group_role = false;
  keygen->add_option("--seed", seed, "RNG seed (default: random)")->each([&](const std::string&) { seeded = true; });
  keygen->add_option("--bound", bound_specs, "element=lo..hi, element index 0-9");
  keygen->add_option("--store", store_path, "Also record the key in this keystore file");
  keygen->add_option("--peer", peer, "Peer id for --store");
  keygen->add_option("--key-id", key_id, "Key id for --store");
  keygen->add_flag("--group", group_role, "Record as the group key");

  auto* tables = app.add_subcommand("tables", "Print the symbol table (and tag table state) of a key");
  bool show_tt = false;
  tables->add_option("--key", key_text, "Serialized key")->required();
  tables->add_option("--state", state_path, "Tag table state file to print");
  tables->add_flag("--tt", show_tt, "Also print the temporary table");

  auto* encrypt = app.add_subcommand("encrypt", "Encrypt an XML or JSON document");
  encrypt->add_option("--key", key_text, "Serialized key")->required();
  encrypt->add_option("--mode", mode_name, "st or tat")->capture_default_str();
  encrypt->add_option("--format", format, "Input format xml|json (default: detect)");
  encrypt->add_option("--in", in_path, "Input file (default: stdin)");
  encrypt->add_option("--out", out_path, "Output file (default: stdout)");
  encrypt->add_option("--access", access_text, "Access list, e.g. 2,3")->capture_default_str();
  encrypt->add_option("--state", state_path, "Tag table state file, read and updated");

  auto* decrypt = app.add_subcommand("decrypt", "Decrypt a message into XML or JSON");
  decrypt->add_option("--key", key_text, "Serialized key")->required();
  decrypt->add_option("--mode", mode_name, "st or tat")->capture_default_str();
  decrypt->add_option("--format", format, "Output format xml|json (default: xml)");
  decrypt->add_option("--in", in_path, "Input file (default: stdin)");
  decrypt->add_option("--out", out_path, "Output file (default: stdout)");
  decrypt->add_option("--state", state_path, "Tag table state file, read and updated");

  auto* sign = app.add_subcommand("sign", "Encrypt under a per-tag key policy and attach digests");
  sign->add_option("--keyring", keyring_path, "Keystore file holding the ring")->required();
  sign->add_option("--policy", policy_text, "Tag ordinal to key id, e.g. 2=K1,3=K2");
  sign->add_option("--recipient", recipient, "Key id the access list is written for");
  sign->add_option("--mode", mode_name, "st or tat")->capture_default_str();
  sign->add_option("--digest", alg_name, "md5, sha1 or sha256")->capture_default_str();
  sign->add_option("--format", format, "Input format xml|json (default: detect)");
  sign->add_option("--in", in_path, "Input file (default: stdin)");
  sign->add_option("--out", out_path, "Output file (default: stdout)");

  auto* verify = app.add_subcommand("verify", "Check the digests of a signed message");
  verify->add_option("--keyring", keyring_path, "Keystore file holding the keys")->required();
  verify->add_option("--policy", policy_text, "Full policy (sender side)");
  verify->add_option("--view", view_key, "Verify as the recipient holding this pairwise key id");
  verify->add_option("--digest", alg_name, "md5, sha1 or sha256")->capture_default_str();
  verify->add_option("--in", in_path, "Input file (default: stdin)");

  auto* bench = app.add_subcommand("bench", "Compare plaintext, STBE and TATBE sizes");
  std::vector<std::string> bench_files;
  std::size_t corpus = 0;
  std::string bench_key = "[12,6,1,1,1,14,4,1,3,2]";
  bench->add_option("files", bench_files, "XML or JSON documents");
  bench->add_option("--key", bench_key, "Serialized key")->capture_default_str();
  bench->add_option("--corpus", corpus, "Also generate this many documents per stratum");
  bench->add_option("--seed", seed, "Corpus seed");

  auto* serve = app.add_subcommand("serve", "Serve encrypted resources over plain HTTP");
  std::string host = "127.0.0.1", server_id = "S";
  int port = 8080;
  std::vector<std::string> resources;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--id", server_id)->capture_default_str();
  serve->add_option("--resource", resources, "name=path, repeatable")->required();
  serve->add_option("--seed", seed, "Key generation seed");

  auto* fetch = app.add_subcommand("fetch", "Obtain a key and fetch a resource");
  std::string resource, method = "get";
  int times = 1;
  fetch->add_option("--host", host)->capture_default_str();
  fetch->add_option("--port", port)->required();
  fetch->add_option("--peer", peer, "Our peer id")->required();
  fetch->add_option("--resource", resource)->required();
  fetch->add_option("--times", times)->capture_default_str();
  fetch->add_option("--method", method, "get or post")->capture_default_str();
  fetch->add_option("--format", format, "Output format xml|json");

  auto* scenario = app.add_subcommand("scenario", "Run the three-party composition pipeline on loopback");
  int rounds = 1;
  std::uint32_t tamper_tag = 0;
  bool fixed_keys = false;
  std::string transcript_path;
  scenario->add_option("--mode", mode_name, "st or tat")->capture_default_str();
  scenario->add_option("--rounds", rounds)->capture_default_str();
  scenario->add_option("--tamper", tamper_tag, "SP1 alters this tag without its key");
  scenario->add_flag("--fixed-keys", fixed_keys, "Use the fixed worked keys instead of the exchange");
  scenario->add_option("--digest", alg_name, "md5, sha1 or sha256")->capture_default_str();
  scenario->add_option("--transcript", transcript_path, "Write the wire transcript here");
  scenario->add_option("--seed", seed, "Key generation seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kExitUsage;
  }

  try {
    if (keygen->parsed()) {
      KeyBounds bounds;
      for (const auto& spec : bound_specs) {
        std::size_t element = 0;
        long long lo = 0, hi = 0;
        char eq = 0, d1 = 0, d2 = 0;
        std::istringstream ss(spec);
        if (!(ss >> element >> eq >> lo >> d1 >> d2 >> hi) || eq != '=' || d1 != '.' || d2 != '.' || element > 9) {
          throw Error(Errc::Malformed, "bound must look like 5=40..63");
        }
        bounds.set(element, lo, hi);
      }
      std::mt19937_64 rng(seeded ? seed : std::random_device{}());
      const TenElementKey key = generate_key(bounds, rng);
      if (!store_path.empty()) {
        if (peer.empty()) throw Error(Errc::Malformed, "--store needs --peer");
        KeyStore store = std::ifstream(store_path) ? KeyStore::load(store_path) : KeyStore{};
        store.put({peer, key_id, group_role ? KeyRole::Group : KeyRole::Pairwise, key});
        store.save(store_path);
      }
      out << serialize_key(key) << "\n";
      return 0;
    }

    if (tables->parsed()) {
      const TenElementKey key = parse_key(key_text);
      out << "key " << serialize_key(key) << "\n";
      if (show_tt) {
        const TempTable tt = build_tt(key);
        out << "tt";
        for (auto ch : tt.col_headers) out << " " << ch;
        out << "\n";
        for (std::size_t r = 0; r < tt.rows; ++r) {
          out << tt.row_headers[r];
          for (std::size_t c = 0; c < tt.cols; ++c) {
            const char cell = tt.at(r, c);
            out << " " << (cell ? std::to_string(static_cast<int>(cell)) : std::string("-"));
          }
          out << "\n";
        }
      }
      const SymbolTable st = build_st(key);
      for (const auto& e : st.entries()) {
        out << "st " << static_cast<int>(e.character) << " " << e.code << "\n";
      }
      const TagTable state = load_state(state_path);
      for (const auto& e : state.entries()) {
        out << "tat " << kind_name(e.kind) << " " << e.word << " " << e.code << "\n";
      }
      return 0;
    }

    if (encrypt->parsed()) {
      const TenElementKey key = parse_key(key_text);
      const WordStream doc = parse_document(read_input(in_path, in), format);
      CodecSession s(key);
      s.tat = load_state(state_path);
      const auto access = parse_access(access_text);
      const auto msg = mode_from(mode_name) == Mode::ST ? stbe(doc, s.st, s.tat, s.ctx, access)
                                                         : tatbe(doc, s.st, s.tat, s.ctx, access);
      write_output(out_path, out, msg.serialize() + "\n");
      save_state(state_path, s.tat);
      return 0;
    }

    if (decrypt->parsed()) {
      const TenElementKey key = parse_key(key_text);
      const auto msg = EncryptedMessage::parse(trim_newlines(read_input(in_path, in)));
      CodecSession s(key);
      s.tat = load_state(state_path);
      const WordStream doc = mode_from(mode_name) == Mode::ST ? stbd(msg, s.st, s.tat, s.ctx)
                                                               : tatbd(msg, s.st, s.tat, s.ctx);
      write_output(out_path, out, emit_document(doc, format) + "\n");
      save_state(state_path, s.tat);
      return 0;
    }

    if (sign->parsed()) {
      KeyRing ring = ring_from_store(KeyStore::load(keyring_path));
      const CompositionPolicy policy = CompositionPolicy::parse(policy_text);
      const WordStream doc = parse_document(read_input(in_path, in), format);
      const auto body = compose_encrypt(doc, policy, ring, mode_from(mode_name));
      std::vector<std::uint32_t> access{1};
      if (!recipient.empty()) {
        const std::vector<std::string> keys{recipient};
        access = access_header(tag_ordinals(doc), policy, ring, keys);
      }
      const EncryptedMessage msg{access, attach_digests(body, policy, ring, algorithm_from(alg_name))};
      write_output(out_path, out, msg.serialize() + "\n");
      return 0;
    }

    if (verify->parsed()) {
      const KeyRing ring = ring_from_store(KeyStore::load(keyring_path));
      const auto msg = EncryptedMessage::parse(trim_newlines(read_input(in_path, in)));
      const CompositionPolicy view =
          view_key.empty() ? CompositionPolicy::parse(policy_text) : recipient_view(msg.access, view_key);
      const VerifyReport report = verify_digests(msg.words, ring, view, algorithm_from(alg_name));
      for (const auto& v : report.subtrees) {
        out << "tag " << v.ordinal << " " << v.key_id.value_or("-") << " " << verdict_name(v.verdict);
        if (!v.reason.empty()) out << " (" << v.reason << ")";
        out << "\n";
      }
      out << (report.accepted() ? "Accept" : "Reject") << "\n";
      return report.accepted() ? 0 : kExitRejected;
    }

    if (bench->parsed()) {
      const TenElementKey key = parse_key(bench_key);
      std::vector<BenchRow> rows;
      for (const auto& path : bench_files) {
        rows.push_back(bench_one(path, parse_document(read_input(path, in), ""), key));
      }
      print_bench(out, rows);
      if (corpus > 0) {
        std::mt19937_64 rng(seed);
        const std::string charset = charset_for(key.symbol_type);
        for (const auto& [label, options] :
             {std::pair{std::string("structure-heavy"), structure_heavy(charset)},
              std::pair{std::string("text-heavy"), text_heavy(charset)}}) {
          std::vector<BenchRow> stratum;
          for (std::size_t i = 0; i < corpus; ++i) {
            stratum.push_back(bench_one(label + "#" + std::to_string(i), random_document(rng, options), key));
          }
          std::size_t smaller = 0;
          double ratio = 0;
          for (const auto& r : stratum) {
            smaller += r.tatbe < r.stbe;
            ratio += static_cast<double>(r.tatbe) / static_cast<double>(r.stbe);
          }
          out << "stratum " << label << ": documents " << stratum.size() << ", tatbe<stbe " << smaller
              << ", mean tatbe/stbe " << std::fixed << std::setprecision(3)
              << ratio / static_cast<double>(stratum.size()) << "\n";
          out.unsetf(std::ios::floatfield);
        }
      }
      return 0;
    }

    if (serve->parsed()) {
      ResourceServer server(server_id, KeyBounds{}.set(5, 40, 63), seed);
      for (const auto& spec : resources) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw Error(Errc::Malformed, "resource must look like name=path");
        server.add_resource(spec.substr(0, eq), parse_document(read_input(spec.substr(eq + 1), in), ""));
      }
      err << "warning: serving plain HTTP without TLS\n";
      err << "listening on " << host << ":" << port << " as " << server_id << "\n";
      server.listen(host, port);
      return 0;
    }

    if (fetch->parsed()) {
      Transcript transcript;
      ResourceClient client(peer, host, port, "server", &transcript);
      out << "key " << serialize_key(client.obtain_key()) << "\n";
      for (int i = 0; i < times; ++i) {
        const WordStream doc = method == "post" ? client.post_empty(resource) : client.get(resource);
        out << "wire " << client.last_body() << "\n";
        out << emit_document(doc, format) << "\n";
      }
      return 0;
    }

    if (scenario->parsed()) {
      ScenarioConfig cfg = ScenarioConfig::three_party();
      cfg.mode = mode_from(mode_name);
      cfg.rounds = rounds;
      cfg.algorithm = algorithm_from(alg_name);
      cfg.exchange_keys = !fixed_keys;
      cfg.seed = seed;
      if (tamper_tag) cfg.intermediaries[0].tamper_tag = tamper_tag;
      const ScenarioResult result = run_composition_scenario(cfg);
      std::string lines;
      for (const auto& r : result.transcript) lines += r.line() + "\n";
      if (transcript_path.empty()) {
        out << lines;
      } else {
        write_output(transcript_path, out, lines);
      }
      for (const auto& [who, report] : result.reports) {
        for (const auto& v : report.subtrees) {
          out << "verdict " << who << " tag " << v.ordinal << " " << v.key_id.value_or("-") << " "
              << verdict_name(v.verdict) << "\n";
        }
      }
      if (!result.completed) {
        err << "error: VerificationFailed: " << result.halted_reason << "\n";
        out << "halted\n";
        return kExitRejected;
      }
      out << emit_xml(result.final_document) << "\n";
      out << "completed\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: Io: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}

}  // namespace restcipher
