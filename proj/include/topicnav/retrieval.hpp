#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicnav/vector_space.hpp"

namespace topicnav {

enum class QueryWeighting {
  Uniform,      // tf = 1 per distinct term
  GroupWeight,  // idf scaled by the term's induced-topic group weight
};

struct TopicalQuery {
  std::vector<std::string> terms;
  double threshold = 0.5;
  std::size_t min_terms = 0;
  std::optional<std::size_t> limit;
  QueryWeighting weighting = QueryWeighting::Uniform;
  /// Parallel to `terms`; only read in GroupWeight mode.
  std::vector<double> term_weights;

  void validate() const;
  bool operator==(const TopicalQuery&) const = default;
};

struct QueryVector {
  SparseVector vector;
  std::vector<std::string> unknown_terms;
};

/// Idf-weighted query vector over the index vocabulary. Repeated terms count
/// once; unknown terms are reported, and AllTermsUnknown is thrown if none match.
QueryVector signature_to_query_vector(std::span<const std::string> terms, const TermDocumentIndex& index,
                                      std::span<const double> term_weights = {});

struct Hit {
  std::string id;
  double score = 0.0;
  std::uint32_t doc_length = 0;

  bool operator==(const Hit&) const = default;
};

struct RetrievalResult {
  std::vector<Hit> hits;  // score-descending, ties by ascending id
  TopicalQuery query;
  std::vector<std::string> warnings;
};

RetrievalResult retrieve(const TopicalQuery& query, const TermDocumentIndex& index);

}  // namespace topicnav
