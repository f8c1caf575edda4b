#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "topicnav/error.hpp"
#include "topicnav/store.hpp"

using namespace topicnav;
using nlohmann::json;
using testing::doc;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  std::vector<Document> docs;
  Vocabulary vocab;
  TermDocumentIndex index;
  LdaModel model;

  Fixture() {
    docs = {doc("d1", {"a", "b", "b"}), doc("d2", {"b", "c"}), doc("d3", {})};
    docs[0].date = parse_iso_date("1931-05-02");
    docs[0].raw_text = "A b, B!\nline two";
    vocab = build_vocabulary(docs, 1, 1.0);
    index = build_index(docs, vocab);
    LdaConfig c;
    c.n_topics = 2;
    c.alpha = 0.5;
    c.rng_seed = 9;
    model = LdaModel(c, vocab.size(), {0.2, 0.3, 0.5, 0.6, 0.3, 0.1}, {-10.5, -9.25});
  }

  void save_all(ExperimentDir& dir) const {
    dir.save_corpus(docs, {{"source", "test"}});
    dir.save_vocabulary(vocab, {{"min_df", 1}});
    dir.save_index(index);
    dir.save_model(model, {{"fragment", 2}});
    dir.save_topics({{"topics", json::array()}}, {});
    dir.save_eval("run", {{"precision", 0.5}}, {});
  }
};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

void flip_byte(const fs::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c = 0;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ 0x5a));
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("codecs round-trip") {
  const Fixture fx;
  CHECK(codec::decode_corpus(codec::encode_corpus(fx.docs)) == fx.docs);
  CHECK(codec::decode_vocabulary(codec::encode_vocabulary(fx.vocab)) == fx.vocab);
  CHECK(codec::decode_index(codec::encode_index(fx.index), fx.vocab) == fx.index);
  CHECK(codec::decode_model(codec::encode_model(fx.model)) == fx.model);
  CHECK_THROWS_AS(codec::decode_model("garbage"), Error);
  CHECK_THROWS_AS(codec::decode_index(codec::encode_index(fx.index).substr(0, 20), fx.vocab), Error);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("experiment directory round-trip") {
  testing::TempDir tmp;
  const Fixture fx;
  {
    auto dir = ExperimentDir::create(tmp.path());
    fx.save_all(dir);
  }
  const auto dir = ExperimentDir::open(tmp.path());
  CHECK(dir.load_corpus() == fx.docs);
  CHECK(dir.load_vocabulary() == fx.vocab);
  CHECK(dir.load_index() == fx.index);
  CHECK(dir.load_model() == fx.model);
  CHECK(dir.load_topics() == json{{"topics", json::array()}});
  CHECK(dir.load_eval("run") == json{{"precision", 0.5}});
  CHECK(dir.entry("vocab").config == json{{"min_df", 1}});
  CHECK(dir.entry("index").depends_on.at("vocab") == dir.entry("vocab").sha256);
  CHECK(dir.verify().ok());
  for (const char* name : {"manifest.json", "corpus.tokens", "vocab.tsv", "index.bin", "lda.bin", "topics.json"}) {
    CHECK(fs::exists(tmp / name));
  }
  CHECK(fs::exists(tmp / "eval" / "run.json"));
}

TEST_CASE("tampering is detected for every artifact kind") {
  const Fixture fx;
  for (const char* key : {"corpus", "vocab", "index", "lda", "topics", "eval/run"}) {
    CAPTURE(key);
    testing::TempDir tmp;
    auto dir = ExperimentDir::create(tmp.path());
    fx.save_all(dir);
    const auto file = dir.entry(key).file;
    flip_byte(tmp / file, 3);
    const auto report = ExperimentDir::verify(tmp.path());
    CHECK_FALSE(report.ok());
    for (const auto& a : report.artifacts) CHECK(a.ok == (a.key != key));
    const auto reopened = ExperimentDir::open(tmp.path());
    if (std::string_view(key) == "lda") CHECK(code_of([&] { reopened.load_model(); }) == ErrorCode::HashMismatch);
    if (std::string_view(key) == "index") CHECK(code_of([&] { reopened.load_index(); }) == ErrorCode::HashMismatch);
    if (std::string_view(key) == "corpus") CHECK(code_of([&] { reopened.load_corpus(); }) == ErrorCode::HashMismatch);
  }
}

TEST_CASE("missing or foreign manifest") {
  testing::TempDir tmp;
  CHECK(code_of([&] { ExperimentDir::open(tmp / "nothing"); }) == ErrorCode::MissingManifest);
  CHECK_FALSE(fs::exists(tmp / "nothing"));
  CHECK_FALSE(ExperimentDir::verify(tmp / "nothing").ok());

  fs::create_directories(tmp / "bad");
  std::ofstream(tmp / "bad" / "manifest.json") << "{\"hello\": 1}";
  CHECK(code_of([&] { ExperimentDir::open(tmp / "bad"); }) == ErrorCode::MissingManifest);

  fs::create_directories(tmp / "future");
  std::ofstream(tmp / "future" / "manifest.json") << R"({"format":"topicnav-experiment","version":99,"artifacts":{}})";
  CHECK(code_of([&] { ExperimentDir::open(tmp / "future"); }) == ErrorCode::VersionMismatch);
}

TEST_CASE("dependencies") {
  testing::TempDir tmp;
  const Fixture fx;
  auto dir = ExperimentDir::create(tmp.path());
  CHECK(code_of([&] { dir.save_vocabulary(fx.vocab, {}); }) == ErrorCode::MissingDependency);
  fx.save_all(dir);
  // replacing the corpus invalidates everything built from it
  auto docs = fx.docs;
  docs.push_back(doc("d4", {"c"}));
  dir.save_corpus(docs, {});
  CHECK(dir.has("corpus"));
  for (const char* key : {"vocab", "index", "lda", "topics", "eval/run"}) CHECK_FALSE(dir.has(key));
  CHECK(ExperimentDir::open(tmp.path()).keys() == std::vector<std::string>{"corpus"});

  // saving the same bytes again keeps dependents
  auto dir2 = ExperimentDir::open(tmp.path());
  dir2.save_vocabulary(fx.vocab, {});
  dir2.save_index(fx.index);
  dir2.save_vocabulary(fx.vocab, {});
  CHECK(dir2.has("index"));

  const Vocabulary other({"zz"}, {1});
  CHECK_THROWS_AS(dir2.save_index(build_index(fx.docs, other)), Error);
}

TEST_CASE("writer lock") {
  testing::TempDir tmp;
  {
    ExperimentLock lock(tmp.path());
    CHECK(fs::exists(tmp / ".lock"));
    CHECK(code_of([&] { ExperimentLock second(tmp.path()); }) == ErrorCode::Locked);
  }
  CHECK_FALSE(fs::exists(tmp / ".lock"));
  // a lock whose holder is gone is reclaimed
  std::ofstream(tmp / ".lock") << "999999999\n";
  CHECK_NOTHROW(ExperimentLock(tmp.path()));
}

}  // TEST_SUITE
