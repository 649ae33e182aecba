#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "restcipher/cli.hpp"
#include "restcipher/codec.hpp"
#include "restcipher/error.hpp"

using namespace restcipher;

namespace {

constexpr const char* kK1 = "[12,6,1,1,1,14,4,1,3,2]";
constexpr const char* kXml1 = R"(<root attr1="value1" attr2="value2"><name>iiti</name><value>2</value></root>)";

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int status = run_cli(args, in, out, err);
  return {status, out.str(), err.str()};
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("restcipher_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  std::string read(const std::string& name) const {
    std::ifstream f(path(name));
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  std::filesystem::path dir_;
};

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).status, 2);
  EXPECT_EQ(cli({"bogus"}).status, 2);
  EXPECT_EQ(cli({"encrypt"}).status, 2);
  EXPECT_EQ(cli({"--help"}).status, 0);
}

TEST(Cli, ModuleErrorsAreNamed) {
  auto r = cli({"encrypt", "--key", "[12,6,2,1,1,14,4,1,3,2]"}, kXml1);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err.rfind("error: OutOfRange: ", 0), 0u) << r.err;
  r = cli({"encrypt", "--key", kK1}, "<a>x<b/></a>");
  EXPECT_EQ(r.err.rfind("error: MixedContentUnsupported: ", 0), 0u) << r.err;
  r = cli({"decrypt", "--key", kK1}, "1, 0999 0");
  EXPECT_EQ(r.err.rfind("error: UnknownCode: ", 0), 0u) << r.err;
}

TEST(Cli, Keygen) {
  const auto a = cli({"keygen", "--seed", "9"});
  const auto b = cli({"keygen", "--seed", "9"});
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NO_THROW(parse_key(a.out.substr(0, a.out.size() - 1)));
  const auto fixed = cli({"keygen", "--seed", "1", "--bound", "5=14..14", "--bound", "0=12..12"});
  EXPECT_EQ(parse_key(fixed.out.substr(0, fixed.out.size() - 1)).symbol_type, 14u);
  EXPECT_EQ(parse_key(fixed.out.substr(0, fixed.out.size() - 1)).rows, 12u);
  const auto none = cli({"keygen", "--bound", "0=1..1", "--bound", "1=1..1", "--bound", "5=63..63"});
  EXPECT_EQ(none.status, 1);
  EXPECT_NE(none.err.find("NoValidKeyInBounds"), std::string::npos);
}

TEST(Cli, Tables) {
  const auto r = cli({"tables", "--key", kK1});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\nst 106 125\n"), std::string::npos);  // 'j'
  EXPECT_NE(r.out.find("\nst 50 349\n"), std::string::npos);   // '2'
}

TEST_F(CliFiles, TatEncryptionWithPrimedState) {
  write("xml1.xml", kXml1);
  const std::string state = path("s.tat");
  ASSERT_EQ(cli({"encrypt", "--key", kK1, "--in", path("xml1.xml"), "--state", state}).status, 0);
  const auto r = cli({"encrypt", "--key", kK1, "--mode", "tat", "--in", path("xml1.xml"), "--state", state});
  EXPECT_EQ(r.out, "1, 04 008 0002 009 0003 05 122122104122 0 06 349 0 0\n");

  const auto table = cli({"tables", "--key", kK1, "--state", state});
  EXPECT_NE(table.out.find("tat tag root 4\n"), std::string::npos);
  EXPECT_NE(table.out.find("tat attribute-value value1 2\n"), std::string::npos);

  // The receiver primes its own state with the first message, then reads JSON.
  const std::string rstate = path("r.tat");
  const auto first = cli({"encrypt", "--key", kK1, "--in", path("xml1.xml")});
  ASSERT_EQ(cli({"decrypt", "--key", kK1, "--state", rstate}, first.out).status, 0);
  const auto json = cli({"decrypt", "--key", kK1, "--mode", "tat", "--format", "json", "--state", rstate}, r.out);
  EXPECT_EQ(json.status, 0) << json.err;
  EXPECT_EQ(json.out, R"({"root":{"-attr1":"value1","-attr2":"value2","name":"iiti","value":"2"}})" "\n");
  EXPECT_EQ(read("s.tat"), read("r.tat"));
}

TEST_F(CliFiles, MatchesLibraryRoundTrip) {
  write("doc.json", R"({"a":{"-k":"v","b":["1","2"],"c":"x"}})");
  const auto enc = cli({"encrypt", "--key", kK1, "--in", path("doc.json"), "--out", path("doc.msg")});
  ASSERT_EQ(enc.status, 0) << enc.err;
  CodecSession s(parse_key(kK1));
  const auto doc = parse_json(R"({"a":{"-k":"v","b":["1","2"],"c":"x"}})");
  EXPECT_EQ(read("doc.msg"), stbe(doc, s.st, s.tat, s.ctx).serialize() + "\n");
  const auto dec = cli({"decrypt", "--key", kK1, "--in", path("doc.msg"), "--format", "json"});
  EXPECT_EQ(dec.out, emit_json(doc) + "\n");
}

TEST_F(CliFiles, CorruptStateFile) {
  write("bad.tat", "tag\troot\n");
  const auto r = cli({"encrypt", "--key", kK1, "--state", path("bad.tat")}, kXml1);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err.rfind("error: Corrupt: ", 0), 0u) << r.err;
}

TEST_F(CliFiles, SignAndVerify) {
  write("ring.tsv",
        "S\tK3\tgroup\t[7,10,0,0,1,14,3,0,3,2]\n"
        "SP1\tK1\tpairwise\t[12,6,1,1,1,14,4,1,3,2]\n"
        "SP2\tK2\tpairwise\t[6,12,1,0,1,14,3,1,3,2]\n");
  write("sp1.tsv",
        "S\tK3\tgroup\t[7,10,0,0,1,14,3,0,3,2]\n"
        "S\tK1\tpairwise\t[12,6,1,1,1,14,4,1,3,2]\n");
  const std::string xml2 =
      R"(<root attr1="value1" attr2="value2"><name>iiti</name><value>2</value><nv>a1</nv></root>)";
  const auto s = cli({"sign", "--keyring", path("ring.tsv"), "--policy", "2=K1,3=K2,4=K2", "--recipient", "K1"}, xml2);
  ASSERT_EQ(s.status, 0) << s.err;
  EXPECT_EQ(s.out.rfind("2, ", 0), 0u) << s.out;

  auto v = cli({"verify", "--keyring", path("ring.tsv"), "--policy", "2=K1,3=K2,4=K2"}, s.out);
  EXPECT_EQ(v.status, 0) << v.out;
  EXPECT_NE(v.out.find("tag 3 K2 Accept"), std::string::npos) << v.out;

  v = cli({"verify", "--keyring", path("sp1.tsv"), "--view", "K1"}, s.out);
  EXPECT_EQ(v.status, 0) << v.out;
  EXPECT_NE(v.out.find("tag 3 - NotCheckable"), std::string::npos) << v.out;

  std::string tampered = s.out;
  tampered[tampered.find(" 313 ") + 3] = '4';
  v = cli({"verify", "--keyring", path("ring.tsv"), "--policy", "2=K1,3=K2,4=K2"}, tampered);
  EXPECT_EQ(v.status, 3);
  EXPECT_NE(v.out.find("tag 3 K2 Reject"), std::string::npos) << v.out;
}

TEST_F(CliFiles, Bench) {
  write("xml1.xml", kXml1);
  const auto r = cli({"bench", path("xml1.xml"), "--corpus", "5"});
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::istringstream fields(row);
  std::string name;
  std::size_t nonvar = 0, var = 0, original = 0, st = 0, tat = 0;
  fields >> name >> nonvar >> var >> original >> st >> tat;
  EXPECT_EQ(nonvar, 35u);
  EXPECT_EQ(var, 5u);
  EXPECT_EQ(original, std::string(kXml1).size());
  EXPECT_LT(tat, st);
  EXPECT_LT(st, 3 * original);
  EXPECT_NE(r.out.find("stratum structure-heavy: documents 5"), std::string::npos);
}

TEST(Cli, Scenario) {
  auto r = cli({"scenario", "--fixed-keys"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("<name>ravi</name>"), std::string::npos);
  r = cli({"scenario", "--tamper", "3", "--mode", "tat"});
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.out.find("verdict SP1 tag 3 K2 Reject"), std::string::npos) << r.out;
}

TEST(Cli, StateFileFormat) {
  TagTable tat;
  tat.insert("root", 4, NonVarKind::Tag);
  tat.insert("a b", 12, NonVarKind::AttrValue);
  EXPECT_EQ(dump_tat(tat), "tag\troot\t4\nattribute-value\ta b\t12\n");
  EXPECT_EQ(parse_tat(dump_tat(tat)), tat);
  EXPECT_THROW(parse_tat("tag\tx\t0\n"), Error);
  EXPECT_THROW(parse_tat("tag\tx\t1\ntag\ty\t1\n"), Error);
}
