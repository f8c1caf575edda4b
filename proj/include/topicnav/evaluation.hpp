#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topicnav/text_pipeline.hpp"

namespace topicnav {

/// Relevant document ids for one topic. When `corpus_ids` is present,
/// predictions and labels are checked against it.
struct GroundTruth {
  TermSet relevant_ids;
  std::uint64_t corpus_size = 0;
  std::optional<TermSet> corpus_ids;

  /// One relevant id per line; blank lines and `#` comments are ignored.
  static GroundTruth load(const std::filesystem::path& path, std::uint64_t corpus_size);
};

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const std::string> predicted_positive, const GroundTruth& truth);

/// Builds the matrix from marginals alone: |predicted|, |predicted & relevant|,
/// |relevant| and the corpus size.
ConfusionMatrix confusion_from_counts(std::uint64_t predicted, std::uint64_t true_positive,
                                      std::uint64_t relevant, std::uint64_t corpus_size);

/// tp / (tp + fp); UndefinedMetric when nothing was predicted.
double precision(const ConfusionMatrix& cm);
/// Informational only on heavily unbalanced tasks.
double recall(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);

/// |first min(k, n) ranked ids that are relevant| / k.
double top_k_precision(std::span<const std::string> ranked_ids, const GroundTruth& truth, std::size_t k);

struct EvaluationReport {
  ConfusionMatrix matrix;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::vector<std::pair<std::size_t, double>> top_k;  // (k, precision@k)
};

/// Full report: matrix, precision, informational recall/F1 and precision@k
/// for k in {5, 10, 20, top_k} not exceeding top_k.
EvaluationReport evaluate(std::span<const std::string> ranked_ids, const GroundTruth& truth, std::size_t top_k);

}  // namespace topicnav
