#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "topicnav/kernels.hpp"
#include "topicnav/text_pipeline.hpp"
#include "topicnav/vector_space.hpp"

namespace topicnav {

struct LdaConfig {
  std::size_t n_topics = 1;
  /// Document-topic prior; unset means 50 / n_topics.
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::size_t burn_in = 500;
  std::size_t sample_lag = 50;
  std::uint64_t rng_seed = 1;
  /// Report the final sweep instead of averaging post-burn-in snapshots.
  bool use_last_sweep = false;
  /// Log-likelihood is recorded every `ll_interval` sweeps and on the last one.
  std::size_t ll_interval = 10;

  double resolved_alpha() const { return alpha ? *alpha : 50.0 / static_cast<double>(n_topics); }
  void validate() const;

  bool operator==(const LdaConfig&) const = default;
};

/// Topic-word weights (rows sum to one) plus the configuration that made them.
class LdaModel {
 public:
  LdaModel() = default;
  LdaModel(LdaConfig config, std::size_t vocab_size, std::vector<double> topic_word,
           std::vector<double> log_likelihood_trace);

  std::size_t n_topics() const noexcept { return config_.n_topics; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  const LdaConfig& config() const noexcept { return config_; }
  std::span<const double> row(std::size_t topic) const;
  std::span<const double> topic_word() const noexcept { return topic_word_; }
  const std::vector<double>& log_likelihood_trace() const noexcept { return ll_trace_; }

  bool operator==(const LdaModel&) const = default;

 private:
  LdaConfig config_;
  std::size_t vocab_size_ = 0;
  std::vector<double> topic_word_;  // n_topics x vocab_size, row-major
  std::vector<double> ll_trace_;
};

double word_weight(const LdaModel& model, std::size_t topic, TermId term);

/// The k heaviest terms of a topic, weight-descending, ties by ascending term id.
std::vector<std::pair<TermId, double>> top_words(const LdaModel& model, std::size_t topic, std::size_t k);

struct SweepStats {
  std::size_t sweep = 0;  // 1-based
  std::int64_t corpus_tokens = 0;
  std::int64_t topic_word_count_sum = 0;
  std::int64_t topic_total_sum = 0;
  std::int64_t doc_topic_count_sum = 0;
  std::optional<double> log_likelihood;
};

struct FitOptions {
  /// Called after every sweep. Count sums are only computed when set.
  std::function<void(const SweepStats&)> on_sweep;
  /// Kernel table override; defaults to kernels::active().
  const kernels::KernelTable* kernels = nullptr;
};

/// Collapsed Gibbs sampling over the in-vocabulary tokens of `docs`.
/// Deterministic for a fixed config (including rng_seed).
LdaModel fit_lda(std::span<const Document> docs, const Vocabulary& vocab, const LdaConfig& config,
                 const FitOptions& options = {});

}  // namespace topicnav
