#include <doctest.h>

#include <cstring>

#include "support.hpp"
#include "topicnav/kernels.hpp"
#include "topicnav/lda.hpp"
#include "topicnav/vector_space.hpp"

using namespace topicnav;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("dispatch") {
  const auto tables = kernels::available();
  REQUIRE_FALSE(tables.empty());
  CHECK(tables.front()->isa == kernels::Isa::Scalar);
  MESSAGE("active kernels: " << kernels::active().name);
}

TEST_CASE("variants agree with the scalar reference") {
  const auto& ref = kernels::scalar();
  std::mt19937_64 rng(3);
  for (const auto* table : kernels::available()) {
    CAPTURE(table->name);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 257u}) {
      CAPTURE(n);
      std::vector<std::int32_t> dt(n), wt(n * 3), tt(n);
      for (std::size_t i = 0; i < n; ++i) {
        dt[i] = static_cast<std::int32_t>(rng() % 50);
        tt[i] = static_cast<std::int32_t>(rng() % 5000);
      }
      for (auto& x : wt) x = static_cast<std::int32_t>(rng() % 300);

      std::vector<double> a(n, -1.0), b(n, -1.0);
      ref.gibbs_topic_weights(dt.data(), wt.data(), tt.data(), n, 0.37, 0.01, 12.5, a.data());
      table->gibbs_topic_weights(dt.data(), wt.data(), tt.data(), n, 0.37, 0.01, 12.5, b.data());
      CHECK(same_bits(a, b));

      std::vector<double> acc_a(n, 0.25), acc_b(n, 0.25);
      ref.accumulate_smoothed(wt.data(), 3, n, 0.01, 4321.0, acc_a.data());
      table->accumulate_smoothed(wt.data(), 3, n, 0.01, 4321.0, acc_b.data());
      CHECK(same_bits(acc_a, acc_b));

      std::vector<double> values(n);
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      for (auto& v : values) v = u(rng);
      CHECK(table->sum_squares(values.data(), n) == doctest::Approx(ref.sum_squares(values.data(), n)).epsilon(1e-12));

      std::vector<double> dense(1000);
      for (auto& v : dense) v = u(rng);
      std::vector<std::uint32_t> pos(n);
      for (auto& p : pos) p = static_cast<std::uint32_t>(rng() % dense.size());
      CHECK(table->sparse_dense_dot(pos.data(), values.data(), n, dense.data()) ==
            doctest::Approx(ref.sparse_dense_dot(pos.data(), values.data(), n, dense.data())).epsilon(1e-12));
    }
  }
}

TEST_CASE("lda fits are bit-identical across kernel variants") {
  testing::PlantedOptions opt;
  opt.n_docs = 60;
  opt.n_topics = 3;
  const auto corpus = testing::planted_corpus(opt);
  const auto vocab = build_vocabulary(corpus.docs, 1, 1.0);
  LdaConfig config;
  config.n_topics = 5;
  config.iterations = 60;
  config.burn_in = 30;
  config.sample_lag = 10;
  FitOptions scalar_opts;
  scalar_opts.kernels = &kernels::scalar();
  const auto reference = fit_lda(corpus.docs, vocab, config, scalar_opts);
  for (const auto* table : kernels::available()) {
    CAPTURE(table->name);
    FitOptions o;
    o.kernels = table;
    CHECK(fit_lda(corpus.docs, vocab, config, o) == reference);
  }
}

}  // TEST_SUITE
