#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicnav/lda.hpp"
#include "topicnav/vector_space.hpp"

namespace topicnav {

/// How member-topic weights merge into a group weight.
enum class Aggregation { Sum, Max };

struct SeedSpec {
  std::vector<std::string> seeds;  // already in preprocessed (index) form
  std::size_t k = 10;
  std::size_t n_start = 2;
  std::size_t n_max = 8;
  /// Minimum max-weight for a seed to count as covered; unset uses default_seed_floor().
  std::optional<double> seed_floor;
  Aggregation aggregation = Aggregation::Sum;

  void validate() const;
};

struct SeedCoverage {
  std::string seed;
  std::optional<TermId> term;  // nullopt when out of vocabulary
  double max_weight = 0.0;
  std::optional<std::size_t> best_topic;
  bool covered = false;
};

struct CoverageReport {
  double seed_floor = 0.0;
  std::vector<SeedCoverage> seeds;

  bool all_covered() const;
};

/// Largest per-topic smoothing floor (row minimum) plus 1 / (10 V).
double default_seed_floor(const LdaModel& model);

CoverageReport check_seed_coverage(const LdaModel& model, const Vocabulary& vocab, const SeedSpec& spec);

/// LDA topics labeled by the same seed, with their merged per-term weights.
struct TopicGroup {
  std::string seed;
  TermId seed_term = 0;
  std::vector<std::size_t> member_topics;
  std::vector<double> group_weight;  // dense over the vocabulary

  bool operator==(const TopicGroup&) const = default;
};

/// Labels every topic with the seed of greatest weight in it (earlier seed on
/// ties) and merges each label's topics into one group, in seed order.
std::vector<TopicGroup> label_topics(const LdaModel& model, const Vocabulary& vocab,
                                     std::span<const std::string> seeds,
                                     Aggregation aggregation = Aggregation::Sum);

struct InducedTopic {
  std::string seed;
  std::vector<std::string> signature;  // seed first
  std::vector<TermId> terms;
  std::vector<double> weights;  // group weight of each signature term
  std::vector<std::size_t> member_topics;

  bool operator==(const InducedTopic&) const = default;
};

struct SignatureWarning {
  std::string seed;
  std::size_t length = 0;
  std::string message;

  bool operator==(const SignatureWarning&) const = default;
};

struct SignatureSet {
  std::vector<InducedTopic> topics;
  std::vector<SignatureWarning> warnings;
};

/// Term-id level allocation: one signature per group, seed first. `exhausted`
/// flags groups whose candidate pool ran dry before reaching k terms.
struct Allocation {
  std::vector<std::vector<TermId>> signatures;
  std::vector<bool> exhausted;
};

/// Round-based greedy allocation. Each round, every unfinished group
/// nominates its heaviest term that is neither a seed nor already assigned;
/// a term nominated by several groups goes to the one weighting it most
/// (earlier group on ties) and the others strike it and nominate again
/// within the same round.
Allocation allocate_signatures(std::span<const TopicGroup> groups, std::size_t k);

SignatureSet build_signatures(std::span<const TopicGroup> groups, const Vocabulary& vocab, std::size_t k);

struct InductionAttempt {
  std::size_t n = 0;
  std::size_t n_topics = 0;
  CoverageReport coverage;
};

struct InductionResult {
  SignatureSet signatures;
  std::size_t final_n = 0;
  std::shared_ptr<const LdaModel> model;
  std::vector<InductionAttempt> attempts;
};

struct InductionOptions {
  /// Reused for the first attempt when its topic count equals n_start * N.
  std::shared_ptr<const LdaModel> initial_model;
  FitOptions fit;
  std::function<void(const InductionAttempt&)> on_attempt;
};

/// Fits LDA with n * N topics for n = n_start..n_max until every seed is
/// covered, then labels and builds signatures. Throws SeedNeverCovered.
InductionResult induce_topics(std::span<const Document> docs, const Vocabulary& vocab, const SeedSpec& spec,
                              const LdaConfig& lda_template, const InductionOptions& options = {});

}  // namespace topicnav
