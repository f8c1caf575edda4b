#include <doctest.h>

#include <cmath>
#include <map>

#include "support.hpp"
#include "topicnav/error.hpp"
#include "topicnav/vector_space.hpp"

using namespace topicnav;
using testing::doc;

TEST_SUITE("vector_space") {

TEST_CASE("vocabulary pruning") {
  const std::vector<Document> docs{doc("d1", {"a", "b"}), doc("d2", {"a"})};
  const auto all = build_vocabulary(docs, 1, 1.0);
  CHECK(all.terms() == std::vector<std::string>{"a", "b"});
  CHECK(all.df(*all.find("a")) == 2);
  CHECK(all.df(*all.find("b")) == 1);
  CHECK(build_vocabulary(docs, 2, 1.0).terms() == std::vector<std::string>{"a"});
  CHECK(build_vocabulary(docs, 1, 0.5).terms() == std::vector<std::string>{"b"});
  CHECK_FALSE(all.find("zzz"));
  CHECK_THROWS_AS(build_vocabulary(std::vector<Document>{}, 1, 1.0), Error);
  CHECK_THROWS_AS(Vocabulary({"a", "a"}, {1, 1}), Error);
}

TEST_CASE("tfidf weight") {
  CHECK(tfidf_weight(1, 5, 5) == 0.0);
  CHECK(tfidf_weight(1, 1, 2) == doctest::Approx(0.6931).epsilon(1e-4));
  CHECK(tfidf_weight(3, 1, std::exp(1.0)) == doctest::Approx(3.0));
  CHECK_THROWS_AS(tfidf_weight(0, 1, 2), Error);
  CHECK_THROWS_AS(tfidf_weight(1, 3, 2), Error);
  CHECK_THROWS_AS(tfidf_weight(1, 0, 2), Error);
}

TEST_CASE("index vectors") {
  const std::vector<Document> docs{doc("d1", {"a", "b"}), doc("d2", {"a"}), doc("d3", {})};
  const auto vocab = build_vocabulary(docs, 1, 1.0);
  const auto index = build_index(docs, vocab);
  CHECK(index.n_docs() == 3);
  CHECK(index.doc_vectors()[0].size() == 2);
  const std::vector<Document> two{doc("d1", {"a", "b"}), doc("d2", {"a"})};
  const auto index2 = build_index(two, build_vocabulary(two, 1, 1.0));
  const auto& v1 = index2.doc_vectors()[0];
  REQUIRE(v1.size() == 1);
  CHECK(v1.at(*index2.vocabulary().find("b")) == doctest::Approx(std::log(2.0)));
  CHECK(v1.at(*index2.vocabulary().find("a")) == 0.0);
  CHECK(index2.doc_vectors()[1].empty());
  CHECK(index.doc_vectors()[2].empty());
  CHECK(index.doc_lengths() == std::vector<std::uint32_t>{2, 1, 0});
  CHECK(index.slot("d2") == std::optional<std::size_t>(1));
  CHECK_FALSE(index.slot("nope"));
  const auto posting = index.postings(*vocab.find("a"));
  CHECK(std::vector<std::uint32_t>(posting.begin(), posting.end()) == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("sparse vector construction") {
  const auto v = SparseVector::from_entries({{5, 1.0}, {2, 0.0}, {1, 2.0}});
  CHECK(v.size() == 2);
  CHECK(v.positions()[0] == 1);
  CHECK(v.positions()[1] == 5);
  CHECK(v.at(2) == 0.0);
  CHECK_THROWS_AS(SparseVector::from_entries({{1, 1.0}, {1, 2.0}}), Error);
  CHECK_THROWS_AS(SparseVector::from_entries({{1, -1.0}}), Error);
}

TEST_CASE("cosine examples") {
  const auto x = SparseVector::from_entries({{0, 1.0}, {1, 1.0}});
  const auto y = SparseVector::from_entries({{0, 1.0}});
  const auto z = SparseVector::from_entries({{2, 3.0}});
  CHECK(cosine(x, x) == doctest::Approx(1.0));
  CHECK(cosine(x, z) == 0.0);
  CHECK(cosine(x, y) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(cosine(x, SparseVector{}) == 0.0);
  CHECK(cosine(SparseVector{}, SparseVector{}) == 0.0);
}

TEST_CASE("cosine properties against a dense oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.0, 3.0);
  auto random_vector = [&] {
    std::vector<std::pair<TermId, double>> e;
    for (TermId t = 0; t < 30; ++t) {
      if (rng() % 3 == 0) e.emplace_back(t, std::round(w(rng) * 4) / 4);
    }
    return SparseVector::from_entries(e);
  };
  auto oracle = [](const SparseVector& a, const SparseVector& b) {
    std::map<TermId, double> da, db;
    for (std::size_t i = 0; i < a.size(); ++i) da[a.positions()[i]] = a.weights()[i];
    for (std::size_t i = 0; i < b.size(); ++i) db[b.positions()[i]] = b.weights()[i];
    double dot = 0, na = 0, nb = 0;
    for (auto [t, v] : da) {
      na += v * v;
      if (db.contains(t)) dot += v * db[t];
    }
    for (auto [t, v] : db) nb += v * v;
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };
  for (int i = 0; i < 500; ++i) {
    const auto a = random_vector();
    const auto b = random_vector();
    const double c = cosine(a, b);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    CHECK(c == doctest::Approx(oracle(a, b)).epsilon(1e-12));
    CHECK(c == doctest::Approx(cosine(b, a)).epsilon(1e-15));
    CHECK(cosine(a.scaled(3.5), b) == doctest::Approx(c).epsilon(1e-12));
    if (!a.empty()) CHECK(cosine(a, a) == doctest::Approx(1.0));
  }
}

}  // TEST_SUITE
