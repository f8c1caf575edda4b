#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topicnav/text_pipeline.hpp"

namespace topicnav {

using TermId = std::uint32_t;

/// Ordered set of index terms with their document frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Validates uniqueness and df >= 1.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df);

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::string& term(TermId id) const;
  std::uint32_t df(TermId id) const;
  std::optional<TermId> find(std::string_view term) const;

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::uint32_t>& document_frequencies() const noexcept { return df_; }

  bool operator==(const Vocabulary& other) const { return terms_ == other.terms_ && df_ == other.df_; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::unordered_map<std::string, TermId, StringHash, std::equal_to<>> index_;
};

/// Keeps terms with min_df <= df <= max_df_ratio * n_docs, in first-appearance order.
Vocabulary build_vocabulary(std::span<const Document> docs, std::uint32_t min_df = 2,
                            double max_df_ratio = 0.5);

/// tf * ln(n_docs / df). Requires tf >= 1 and 1 <= df <= n_docs.
double tfidf_weight(double tf, double df, double n_docs);

/// Sorted (position, weight) pairs with strictly increasing positions and no
/// zero weights. Stored structure-of-arrays so kernels can stream them.
class SparseVector {
 public:
  SparseVector() = default;
  /// Sorts entries, drops zeros; rejects duplicate positions and negative or
  /// non-finite weights.
  static SparseVector from_entries(std::vector<std::pair<TermId, double>> entries);

  std::size_t size() const noexcept { return positions_.size(); }
  bool empty() const noexcept { return positions_.empty(); }
  std::span<const TermId> positions() const noexcept { return positions_; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// Weight at `position`, 0 when absent.
  double at(TermId position) const;
  SparseVector scaled(double factor) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<TermId> positions_;
  std::vector<double> weights_;
};

/// x.y / (|x| |y|) over the shared support; 0 when either vector is empty.
double cosine(const SparseVector& x, const SparseVector& y);
double norm(const SparseVector& x);

/// Term-document matrix with per-document TF-IDF vectors and token counts.
/// Immutable once constructed; postings and norms are derived on construction.
class TermDocumentIndex {
 public:
  TermDocumentIndex() = default;
  TermDocumentIndex(Vocabulary vocabulary, std::vector<std::string> doc_ids,
                    std::vector<SparseVector> doc_vectors, std::vector<std::uint32_t> doc_lengths);

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  std::size_t n_docs() const noexcept { return doc_ids_.size(); }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const std::vector<SparseVector>& doc_vectors() const noexcept { return doc_vectors_; }
  const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
  std::span<const double> doc_norms() const noexcept { return doc_norms_; }

  std::optional<std::size_t> slot(std::string_view doc_id) const;
  /// Document slots containing `term`, ascending.
  std::span<const std::uint32_t> postings(TermId term) const;

  bool operator==(const TermDocumentIndex& other) const {
    return vocabulary_ == other.vocabulary_ && doc_ids_ == other.doc_ids_ &&
           doc_vectors_ == other.doc_vectors_ && doc_lengths_ == other.doc_lengths_;
  }

 private:
  Vocabulary vocabulary_;
  std::vector<std::string> doc_ids_;
  std::vector<SparseVector> doc_vectors_;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<double> doc_norms_;
  std::vector<std::vector<std::uint32_t>> postings_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> slots_;
};

TermDocumentIndex build_index(std::span<const Document> docs, const Vocabulary& vocab);

}  // namespace topicnav
