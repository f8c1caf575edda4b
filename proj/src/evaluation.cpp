#include "topicnav/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "topicnav/error.hpp"

namespace topicnav {

GroundTruth GroundTruth::load(const std::filesystem::path& path, std::uint64_t corpus_size) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  GroundTruth truth;
  truth.corpus_size = corpus_size;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    truth.relevant_ids.insert(line.substr(first, last - first + 1));
  }
  if (truth.relevant_ids.size() > corpus_size) {
    throw Error(ErrorCode::IdOutsideCorpus, "more relevant ids than documents in the corpus");
  }
  return truth;
}

ConfusionMatrix confusion_from_counts(std::uint64_t predicted, std::uint64_t true_positive,
                                      std::uint64_t relevant, std::uint64_t corpus_size) {
  if (true_positive > predicted || true_positive > relevant) {
    throw Error(ErrorCode::InvalidArgument, "true positives exceed predicted or relevant count");
  }
  if (predicted + relevant - true_positive > corpus_size) {
    throw Error(ErrorCode::IdOutsideCorpus, "predicted and relevant sets do not fit in the corpus");
  }
  ConfusionMatrix cm;
  cm.tp = true_positive;
  cm.fp = predicted - true_positive;
  cm.fn = relevant - true_positive;
  cm.tn = corpus_size - cm.tp - cm.fp - cm.fn;
  return cm;
}

ConfusionMatrix confusion(std::span<const std::string> predicted_positive, const GroundTruth& truth) {
  if (truth.corpus_ids) {
    for (const auto& id : truth.relevant_ids) {
      if (!truth.corpus_ids->contains(id)) {
        throw Error(ErrorCode::IdOutsideCorpus, "relevant id '" + id + "' is not in the corpus");
      }
    }
  }
  std::set<std::string_view> predicted;
  std::uint64_t tp = 0;
  for (const auto& id : predicted_positive) {
    if (truth.corpus_ids && !truth.corpus_ids->contains(id)) {
      throw Error(ErrorCode::IdOutsideCorpus, "predicted id '" + id + "' is not in the corpus");
    }
    if (predicted.insert(id).second && truth.relevant_ids.contains(id)) ++tp;
  }
  return confusion_from_counts(predicted.size(), tp, truth.relevant_ids.size(), truth.corpus_size);
}

double precision(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fp == 0) throw Error(ErrorCode::UndefinedMetric, "precision is undefined without positive predictions");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
}

double recall(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0) throw Error(ErrorCode::UndefinedMetric, "recall is undefined without relevant documents");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

double f1(const ConfusionMatrix& cm) {
  const double p = precision(cm), r = recall(cm);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double top_k_precision(std::span<const std::string> ranked_ids, const GroundTruth& truth, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const std::size_t n = std::min(k, ranked_ids.size());
  std::size_t relevant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (truth.relevant_ids.contains(ranked_ids[i])) ++relevant;
  }
  return static_cast<double>(relevant) / static_cast<double>(k);
}

EvaluationReport evaluate(std::span<const std::string> ranked_ids, const GroundTruth& truth, std::size_t top_k) {
  EvaluationReport report;
  report.matrix = confusion(ranked_ids, truth);
  auto optional_metric = [&](double (*fn)(const ConfusionMatrix&)) -> std::optional<double> {
    try {
      return fn(report.matrix);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  report.precision = optional_metric(precision);
  report.recall = optional_metric(recall);
  report.f1 = optional_metric(f1);
  std::set<std::size_t> ks;
  for (std::size_t k : {std::size_t{5}, std::size_t{10}, std::size_t{20}, top_k}) {
    if (k >= 1 && k <= top_k) ks.insert(k);
  }
  for (std::size_t k : ks) report.top_k.emplace_back(k, top_k_precision(ranked_ids, truth, k));
  return report;
}

}  // namespace topicnav
