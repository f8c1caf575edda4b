#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "topicnav/error.hpp"
#include "topicnav/lda.hpp"
#include "topicnav/vector_space.hpp"

using namespace topicnav;

namespace {

LdaConfig quick_config(std::size_t m) {
  LdaConfig c;
  c.n_topics = m;
  c.iterations = 200;
  c.burn_in = 100;
  c.sample_lag = 10;
  c.rng_seed = 42;
  return c;
}

testing::PlantedCorpus two_topic_corpus() {
  testing::PlantedOptions opt;
  opt.n_docs = 200;
  opt.n_topics = 2;
  opt.words_per_topic = 20;
  opt.dominant_share = 0.9;
  return testing::planted_corpus(opt);
}

/// Share of each recovered topic's mass lying on its best-matching planted block.
std::vector<double> concentration(const LdaModel& model, const Vocabulary& vocab, const testing::PlantedCorpus& c) {
  std::vector<double> out;
  for (std::size_t k = 0; k < model.n_topics(); ++k) {
    double best = 0;
    for (const auto& block : c.topic_words) {
      double mass = 0;
      for (const auto& w : block) {
        if (auto id = vocab.find(w)) mass += model.row(k)[*id];
      }
      best = std::max(best, mass);
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

TEST_SUITE("lda") {

TEST_CASE("config validation") {
  LdaConfig c;
  c.n_topics = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.n_topics = 4;
  CHECK(c.resolved_alpha() == doctest::Approx(12.5));
  c.beta = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.beta = 0.01;
  c.burn_in = c.iterations;
  CHECK_THROWS_AS(c.validate(), Error);
  c.burn_in = c.iterations - 1;
  CHECK_NOTHROW(c.validate());
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("one topic reproduces the smoothed empirical distribution") {
  const auto corpus = two_topic_corpus();
  const auto vocab = build_vocabulary(corpus.docs, 1, 1.0);
  const auto model = fit_lda(corpus.docs, vocab, quick_config(1));
  std::vector<double> counts(vocab.size(), 0.0);
  double total = 0;
  for (const auto& d : corpus.docs) {
    for (const auto& t : d.tokens) {
      if (auto id = vocab.find(t)) {
        counts[*id] += 1;
        total += 1;
      }
    }
  }
  const double beta = model.config().beta;
  const double v = static_cast<double>(vocab.size());
  for (TermId w = 0; w < vocab.size(); ++w) {
    CHECK(model.row(0)[w] == doctest::Approx((counts[w] + beta) / (total + v * beta)).epsilon(1e-12));
  }
}

TEST_CASE("planted topics are recovered") {
  const auto corpus = two_topic_corpus();
  const auto vocab = build_vocabulary(corpus.docs, 1, 1.0);
  const auto model = fit_lda(corpus.docs, vocab, quick_config(2));
  for (double share : concentration(model, vocab, corpus)) CHECK(share >= 0.95);
}

TEST_CASE("fits are deterministic per seed") {
  const auto corpus = two_topic_corpus();
  const auto vocab = build_vocabulary(corpus.docs, 1, 1.0);
  const auto a = fit_lda(corpus.docs, vocab, quick_config(3));
  const auto b = fit_lda(corpus.docs, vocab, quick_config(3));
  CHECK(a == b);
  auto other = quick_config(3);
  other.rng_seed = 43;
  CHECK_FALSE(fit_lda(corpus.docs, vocab, other) == a);
}

TEST_CASE("counts are conserved at every sweep") {
  const auto corpus = two_topic_corpus();
  const auto vocab = build_vocabulary(corpus.docs, 1, 1.0);
  auto config = quick_config(4);
  config.iterations = 50;
  config.burn_in = 20;
  std::size_t sweeps = 0;
  bool conserved = true;
  std::vector<double> trace;
  FitOptions o;
  o.on_sweep = [&](const SweepStats& s) {
    ++sweeps;
    conserved = conserved && s.sweep == sweeps && s.corpus_tokens > 0 &&
                s.topic_word_count_sum == s.corpus_tokens && s.topic_total_sum == s.corpus_tokens &&
                s.doc_topic_count_sum == s.corpus_tokens;
    if (s.log_likelihood) trace.push_back(*s.log_likelihood);
  };
  const auto model = fit_lda(corpus.docs, vocab, config, o);
  CHECK(sweeps == 50);
  CHECK(conserved);
  CHECK(trace == model.log_likelihood_trace());
  CHECK(trace.size() == 5);
  for (double ll : trace) CHECK(std::isfinite(ll));
  CHECK(trace.back() > trace.front());
}

TEST_CASE("topic-word rows") {
  const auto corpus = two_topic_corpus();
  auto docs = corpus.docs;
  const auto vocab = Vocabulary([&] {
    auto terms = build_vocabulary(docs, 1, 1.0).terms();
    terms.push_back("neverseen");
    return terms;
  }(), std::vector<std::uint32_t>(build_vocabulary(docs, 1, 1.0).size() + 1, 1));
  const auto model = fit_lda(docs, vocab, quick_config(3));
  for (std::size_t k = 0; k < 3; ++k) {
    const auto row = model.row(k);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(word_weight(model, k, *vocab.find("neverseen")) > 0.0);
  }
  CHECK_THROWS_AS(model.row(3), Error);
  CHECK_THROWS_AS(word_weight(model, 0, static_cast<TermId>(vocab.size())), Error);
}

TEST_CASE("top words") {
  LdaConfig c;
  c.n_topics = 1;
  const LdaModel model(c, 4, {0.1, 0.4, 0.4, 0.1}, {});
  const auto one = top_words(model, 0, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == 1);
  const auto all = top_words(model, 0, 10);
  REQUIRE(all.size() == 4);
  CHECK(all[0].first == 1);
  CHECK(all[1].first == 2);
  CHECK(all[2].first == 0);
  CHECK(all[3].first == 3);
}

TEST_CASE("empty inputs") {
  const std::vector<Document> docs{testing::doc("a", {"x"})};
  const auto vocab = build_vocabulary(docs, 1, 1.0);
  const std::vector<Document> unrelated{testing::doc("b", {"y"})};
  CHECK_THROWS_AS(fit_lda(unrelated, vocab, quick_config(2)), Error);
}

}  // TEST_SUITE
