#include "topicnav/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "topicnav/error.hpp"

namespace topicnav {

void LdaConfig::validate() const {
  if (n_topics < 1) throw Error(ErrorCode::InvalidArgument, "n_topics must be >= 1");
  if (alpha && !(*alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be > 0");
  if (iterations <= burn_in) throw Error(ErrorCode::InvalidArgument, "iterations must exceed burn_in");
  if (sample_lag < 1) throw Error(ErrorCode::InvalidArgument, "sample_lag must be >= 1");
  if (ll_interval < 1) throw Error(ErrorCode::InvalidArgument, "ll_interval must be >= 1");
}

LdaModel::LdaModel(LdaConfig config, std::size_t vocab_size, std::vector<double> topic_word,
                   std::vector<double> log_likelihood_trace)
    : config_(std::move(config)),
      vocab_size_(vocab_size),
      topic_word_(std::move(topic_word)),
      ll_trace_(std::move(log_likelihood_trace)) {
  if (topic_word_.size() != config_.n_topics * vocab_size_) {
    throw Error(ErrorCode::InvalidArgument, "topic-word matrix has the wrong shape");
  }
}

std::span<const double> LdaModel::row(std::size_t topic) const {
  if (topic >= n_topics()) throw Error(ErrorCode::OutOfRange, "topic index out of range");
  return std::span<const double>(topic_word_).subspan(topic * vocab_size_, vocab_size_);
}

double word_weight(const LdaModel& model, std::size_t topic, TermId term) {
  if (term >= model.vocab_size()) throw Error(ErrorCode::OutOfRange, "term index out of range");
  return model.row(topic)[term];
}

std::vector<std::pair<TermId, double>> top_words(const LdaModel& model, std::size_t topic, std::size_t k) {
  const auto row = model.row(topic);
  std::vector<TermId> ids(row.size());
  std::iota(ids.begin(), ids.end(), TermId{0});
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [&](TermId a, TermId b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
  std::vector<std::pair<TermId, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(ids[i], row[ids[i]]);
  return out;
}

namespace {

class Sampler {
 public:
  Sampler(std::span<const Document> docs, const Vocabulary& vocab, const LdaConfig& config,
          const kernels::KernelTable& kernels)
      : config_(config),
        kernels_(kernels),
        topics_(config.n_topics),
        vocab_size_(vocab.size()),
        alpha_(config.resolved_alpha()),
        beta_(config.beta),
        vbeta_(static_cast<double>(vocab.size()) * config.beta),
        rng_(config.rng_seed) {
    doc_offsets_.push_back(0);
    for (const auto& doc : docs) {
      const std::size_t before = words_.size();
      for (const auto& token : doc.tokens) {
        if (auto id = vocab.find(token)) words_.push_back(*id);
      }
      if (words_.size() > before) doc_offsets_.push_back(words_.size());
    }
    if (words_.empty()) {
      throw Error(ErrorCode::EmptyCorpus, "no document has an in-vocabulary token");
    }
    const std::size_t n_docs = doc_offsets_.size() - 1;
    assignments_.resize(words_.size());
    word_topic_.assign(vocab_size_ * topics_, 0);
    doc_topic_.assign(n_docs * topics_, 0);
    topic_total_.assign(topics_, 0);
    weights_.resize(topics_);

    for (std::size_t d = 0; d < n_docs; ++d) {
      for (std::size_t i = doc_offsets_[d]; i < doc_offsets_[d + 1]; ++i) {
        const auto topic = static_cast<std::int32_t>(
            std::min<std::size_t>(topics_ - 1, static_cast<std::size_t>(uniform() * topics_)));
        assignments_[i] = topic;
        add(d, words_[i], topic, 1);
      }
    }
  }

  void sweep() {
    const std::size_t n_docs = doc_offsets_.size() - 1;
    for (std::size_t d = 0; d < n_docs; ++d) {
      const std::int32_t* doc_row = &doc_topic_[d * topics_];
      for (std::size_t i = doc_offsets_[d]; i < doc_offsets_[d + 1]; ++i) {
        const TermId w = words_[i];
        add(d, w, assignments_[i], -1);
        kernels_.gibbs_topic_weights(doc_row, &word_topic_[static_cast<std::size_t>(w) * topics_],
                                     topic_total_.data(), topics_, alpha_, beta_, vbeta_, weights_.data());
        double total = 0.0;
        for (std::size_t k = 0; k < topics_; ++k) {
          total += weights_[k];
          weights_[k] = total;
        }
        const double target = uniform() * total;
        std::size_t topic = 0;
        while (topic + 1 < topics_ && weights_[topic] <= target) ++topic;
        assignments_[i] = static_cast<std::int32_t>(topic);
        add(d, w, static_cast<std::int32_t>(topic), 1);
      }
    }
  }

  void accumulate_phi(std::vector<double>& phi) const {
    for (std::size_t k = 0; k < topics_; ++k) {
      kernels_.accumulate_smoothed(word_topic_.data() + k, topics_, vocab_size_, beta_,
                                   static_cast<double>(topic_total_[k]) + vbeta_, phi.data() + k * vocab_size_);
    }
  }

  double log_likelihood() const {
    const double lg_beta = std::lgamma(beta_);
    const double lg_vbeta = std::lgamma(vbeta_);
    double ll = 0.0;
    for (std::size_t k = 0; k < topics_; ++k) {
      ll += lg_vbeta - std::lgamma(static_cast<double>(topic_total_[k]) + vbeta_);
      for (std::size_t w = 0; w < vocab_size_; ++w) {
        const std::int32_t c = word_topic_[w * topics_ + k];
        if (c > 0) ll += std::lgamma(static_cast<double>(c) + beta_) - lg_beta;
      }
    }
    return ll;
  }

  SweepStats stats(std::size_t sweep) const {
    SweepStats s;
    s.sweep = sweep;
    s.corpus_tokens = static_cast<std::int64_t>(words_.size());
    s.topic_word_count_sum = std::accumulate(word_topic_.begin(), word_topic_.end(), std::int64_t{0});
    s.topic_total_sum = std::accumulate(topic_total_.begin(), topic_total_.end(), std::int64_t{0});
    s.doc_topic_count_sum = std::accumulate(doc_topic_.begin(), doc_topic_.end(), std::int64_t{0});
    return s;
  }

 private:
  // 53 random bits, identical on every platform for a given seed.
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  void add(std::size_t doc, TermId word, std::int32_t topic, std::int32_t delta) {
    const auto k = static_cast<std::size_t>(topic);
    doc_topic_[doc * topics_ + k] += delta;
    word_topic_[static_cast<std::size_t>(word) * topics_ + k] += delta;
    topic_total_[k] += delta;
  }

  const LdaConfig& config_;
  const kernels::KernelTable& kernels_;
  std::size_t topics_;
  std::size_t vocab_size_;
  double alpha_, beta_, vbeta_;
  std::mt19937_64 rng_;

  std::vector<TermId> words_;
  std::vector<std::size_t> doc_offsets_;
  std::vector<std::int32_t> assignments_;
  std::vector<std::int32_t> word_topic_;  // vocab x topics
  std::vector<std::int32_t> doc_topic_;   // docs x topics
  std::vector<std::int32_t> topic_total_;
  std::vector<double> weights_;
};

}  // namespace

LdaModel fit_lda(std::span<const Document> docs, const Vocabulary& vocab, const LdaConfig& config,
                 const FitOptions& options) {
  config.validate();
  if (vocab.empty()) throw Error(ErrorCode::EmptyCorpus, "vocabulary is empty");
  const auto& kernels = options.kernels ? *options.kernels : kernels::active();
  Sampler sampler(docs, vocab, config, kernels);

  LdaConfig resolved = config;
  resolved.alpha = config.resolved_alpha();

  const std::size_t cells = config.n_topics * vocab.size();
  std::vector<double> phi_sum(cells, 0.0);
  std::size_t snapshots = 0;
  std::vector<double> trace;

  for (std::size_t sweep = 1; sweep <= config.iterations; ++sweep) {
    sampler.sweep();
    std::optional<double> ll;
    if (sweep % config.ll_interval == 0 || sweep == config.iterations) {
      ll = sampler.log_likelihood();
      trace.push_back(*ll);
    }
    if (!config.use_last_sweep && sweep > config.burn_in && (sweep - config.burn_in) % config.sample_lag == 0) {
      sampler.accumulate_phi(phi_sum);
      ++snapshots;
    }
    if (options.on_sweep) {
      SweepStats s = sampler.stats(sweep);
      s.log_likelihood = ll;
      options.on_sweep(s);
    }
  }

  if (snapshots == 0) {
    std::fill(phi_sum.begin(), phi_sum.end(), 0.0);
    sampler.accumulate_phi(phi_sum);
    snapshots = 1;
  }
  if (snapshots > 1) {
    const double inv = static_cast<double>(snapshots);
    for (double& v : phi_sum) v /= inv;
  }
  return LdaModel(std::move(resolved), vocab.size(), std::move(phi_sum), std::move(trace));
}

}  // namespace topicnav
