#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "topicnav/error.hpp"
#include "topicnav/text_pipeline.hpp"

using namespace topicnav;
using Tokens = std::vector<std::string>;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_SUITE("text_pipeline") {

TEST_CASE("jsonl corpus loading") {
  testing::TempDir tmp;
  write_file(tmp / "c.jsonl",
             "{\"id\":\"a\",\"text\":\"one\",\"date\":\"1920-03-04\"}\n"
             "{\"id\":\"b\",\"text\":\"two\"}\n"
             "\n"
             "{\"id\":\"c\",\"text\":\"three\",\"date\":null}\n");
  const auto docs = load_corpus(tmp / "c.jsonl", CorpusFormat::Jsonl);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].id == "a");
  CHECK(docs[1].id == "b");
  CHECK(docs[2].id == "c");
  REQUIRE(docs[0].date);
  CHECK(format_iso_date(*docs[0].date) == "1920-03-04");
  CHECK_FALSE(docs[1].date);

  write_file(tmp / "empty.jsonl", "");
  CHECK(load_corpus(tmp / "empty.jsonl", CorpusFormat::Jsonl).empty());

  write_file(tmp / "dup.jsonl", "{\"id\":\"x1\",\"text\":\"a\"}\n{\"id\":\"x1\",\"text\":\"b\"}\n");
  try {
    load_corpus(tmp / "dup.jsonl", CorpusFormat::Jsonl);
    FAIL("duplicate id accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateId);
    CHECK(std::string(e.what()).find("x1") != std::string::npos);
  }

  write_file(tmp / "bad.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{not json\n");
  try {
    load_corpus(tmp / "bad.jsonl", CorpusFormat::Jsonl);
    FAIL("malformed record accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRecord);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  write_file(tmp / "baddate.jsonl", "{\"id\":\"a\",\"text\":\"x\",\"date\":\"1920-13-40\"}\n");
  CHECK(code_of([&] { load_corpus(tmp / "baddate.jsonl", CorpusFormat::Jsonl); }) == ErrorCode::MalformedRecord);
  CHECK(code_of([&] { load_corpus(tmp / "missing.jsonl", CorpusFormat::Jsonl); }) == ErrorCode::Io);
}

TEST_CASE("text directory corpus") {
  testing::TempDir tmp;
  write_file(tmp / "corpus" / "b.txt", "beta");
  write_file(tmp / "corpus" / "sub" / "a.txt", "alpha");
  write_file(tmp / "corpus" / "skip.md", "ignored");
  const auto docs = load_corpus(tmp / "corpus", CorpusFormat::TextDirectory);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "b.txt");
  CHECK(docs[1].id == "sub/a.txt");
  CHECK(docs[1].raw_text == "alpha");
  CHECK(parse_corpus_format("dir") == CorpusFormat::TextDirectory);

  write_file(tmp / "latin" / "x.txt", "elei\xe7\xe3o");
  CHECK(load_corpus(tmp / "latin", CorpusFormat::TextDirectory)[0].raw_text == "eleição");
  CHECK(code_of([] { parse_corpus_format("xml"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("normalization") {
  PipelineConfig config;
  CHECK(normalize_text("ELEI-\nÇÃO", config) == "eleição");
  CHECK(normalize_text("abc\x07" "def", config) == "abcdef");
  CHECK(normalize_text("already clean text", config) == "already clean text");
  // a hyphen not at a line break is kept
  CHECK(normalize_text("bem-vindo", config) == "bem-vindo");
  // soft hyphen and trailing spaces around the break
  CHECK(normalize_text("vo\xC2\xAD  \n  tação", config) == "votação");
  config.lowercase = false;
  config.rejoin_hyphenation = false;
  CHECK(normalize_text("ELEI-\nÇÃO", config) == "ELEI-\nÇÃO");
  config.strip_diacritics = true;
  CHECK(normalize_text("ELEIÇÃO", config) == "ELEICAO");
}

TEST_CASE("tokenization") {
  CHECK(tokenize("a mesa, o voto.") == Tokens{"a", "mesa", "o", "voto"});
  CHECK(tokenize("a mesa, o voto.", TokenizerMode::Words) == Tokens{"a", "mesa", "o", "voto"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("x1y") == Tokens{"x", "y"});
  CHECK(tokenize("x1y", TokenizerMode::Words) == Tokens{"x1y"});
  CHECK(tokenize("coração   «pátria»") == Tokens{"coração", "pátria"});
}

TEST_CASE("lexicon standardization") {
  const auto lex = LexiconTable::from_entries({{"pharmacia", "farmacia"}, {"phosphoro", "fosforo"}});
  CHECK(standardize({"pharmacia"}, lex) == Tokens{"farmacia"});
  CHECK(standardize({"mesa"}, lex) == Tokens{"mesa"});
  const Tokens input{"pharmacia", "mesa", "phosphoro"};
  CHECK(standardize(standardize(input, lex), lex) == standardize(input, lex));
  // a canonical form that is itself rewritten would break idempotence
  CHECK(code_of([] { LexiconTable::from_entries({{"a", "b"}, {"b", "c"}}); }) == ErrorCode::InvalidLexicon);
  CHECK(code_of([] { LexiconTable::from_entries({{"a", "b"}, {"a", "c"}}); }) == ErrorCode::InvalidLexicon);
}

TEST_CASE("noise rules") {
  const auto rules = default_noise_rules();
  auto noisy = [&](std::string_view t) {
    return std::any_of(rules.begin(), rules.end(), [&](const NoiseRule& r) { return r.matches(t); });
  };
  CHECK(noisy("xj7##q"));
  CHECK(noisy("a1"));
  CHECK(noisy("19"));
  CHECK(noisy("x"));
  CHECK_FALSE(noisy("mesa"));
  CHECK_FALSE(noisy("eleição"));
}

TEST_CASE("stemmer") {
  Stemmer stemmer({{"ção", "c"}, {"ções", "c"}, {"s", ""}});
  CHECK(stemmer.stem("eleição") == "eleic");
  CHECK(stemmer.stem("eleições") == "eleic");
  CHECK(stemmer.stem("mesas") == "mesa");
  // too little left before the suffix
  CHECK(stemmer.stem("as") == "as");
  CHECK(stemmer.stem("voto") == "voto");
}

TEST_CASE("full pipeline") {
  PipelineConfig config;
  config.stopwords = {"a", "das"};
  config.stemmer_rules = {{"ção", "c"}, {"ções", "c"}};
  const Pipeline pipeline(config, {});
  CHECK(pipeline.process_text("A eleição das eleições") == Tokens{"eleic", "eleic"});
  CHECK(pipeline.process_text("a das A DAS").empty());
  const auto tokens = pipeline.process_text("voto xj7##q mesa");
  CHECK(tokens == Tokens{"voto", "mesa"});

  CHECK(pipeline.process_term("Eleições") == std::optional<std::string>("eleic"));
  CHECK_FALSE(pipeline.process_term("das"));
  CHECK_FALSE(pipeline.process_term("two words"));

  Document d;
  d.id = "x";
  d.raw_text = "Mesa e voto";
  CHECK(preprocess(d, config, {}).tokens == Tokens{"mesa", "voto"});
}

TEST_CASE("processed tokens never contain filtered forms") {
  PipelineConfig config;
  config.stopwords = {"de", "para", "em"};
  // "ems" stems to a stopword, "abs" to something too short
  config.stemmer_rules = {{"s", ""}};
  const Pipeline pipeline(config, LexiconTable::from_entries({{"paras", "para"}}));
  testing::PlantedOptions opt;
  opt.noise_fraction = 0.3;
  opt.stopwords = {"de", "para", "em", "ems", "abs", "paras"};
  const auto corpus = testing::planted_corpus(opt);
  for (const auto& doc : corpus.docs) {
    for (const auto& token : pipeline.process_text(doc.raw_text)) {
      CHECK_FALSE(pipeline.is_filtered(token));
      CHECK_FALSE(config.stopwords.contains(token));
      CHECK(token.size() >= config.min_token_len);
    }
  }
}

TEST_CASE("parallel preprocessing matches sequential") {
  testing::PlantedOptions opt;
  opt.n_docs = 300;
  opt.noise_fraction = 0.2;
  auto docs = testing::planted_corpus(opt).docs;
  const Pipeline pipeline(PipelineConfig{}, {});
  auto expected = docs;
  for (auto& d : expected) d.tokens = pipeline.process_text(d.raw_text);
  preprocess_corpus(docs, pipeline, 4);
  CHECK(docs == expected);
}

}  // TEST_SUITE
