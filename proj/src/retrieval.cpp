#include "topicnav/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "topicnav/error.hpp"
#include "topicnav/kernels.hpp"

namespace topicnav {

void TopicalQuery::validate() const {
  if (terms.empty()) throw Error(ErrorCode::InvalidArgument, "query needs at least one term");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0, 1]");
  }
  if (limit && *limit == 0) throw Error(ErrorCode::InvalidArgument, "limit must be >= 1");
  if (weighting == QueryWeighting::GroupWeight) {
    if (term_weights.size() != terms.size()) {
      throw Error(ErrorCode::InvalidArgument, "group-weighted query needs one weight per term");
    }
    for (double w : term_weights) {
      if (!std::isfinite(w) || w < 0.0) throw Error(ErrorCode::InvalidArgument, "term weights must be >= 0");
    }
  }
}

QueryVector signature_to_query_vector(std::span<const std::string> terms, const TermDocumentIndex& index,
                                      std::span<const double> term_weights) {
  const auto& vocab = index.vocabulary();
  const double n_docs = static_cast<double>(index.n_docs());
  QueryVector out;
  std::vector<std::pair<TermId, double>> entries;
  std::unordered_set<TermId> seen;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto id = vocab.find(terms[i]);
    if (!id) {
      out.unknown_terms.push_back(terms[i]);
      continue;
    }
    if (!seen.insert(*id).second) continue;
    double weight = tfidf_weight(1.0, vocab.df(*id), n_docs);
    if (!term_weights.empty()) weight *= term_weights[i];
    entries.emplace_back(*id, weight);
  }
  if (seen.empty()) {
    throw Error(ErrorCode::AllTermsUnknown, "none of the query terms is in the index vocabulary");
  }
  out.vector = SparseVector::from_entries(std::move(entries));
  return out;
}

RetrievalResult retrieve(const TopicalQuery& query, const TermDocumentIndex& index) {
  query.validate();
  const bool weighted = query.weighting == QueryWeighting::GroupWeight;
  QueryVector qv = signature_to_query_vector(query.terms, index,
                                             weighted ? std::span<const double>(query.term_weights)
                                                      : std::span<const double>{});
  RetrievalResult result;
  result.query = query;
  for (const auto& term : qv.unknown_terms) result.warnings.push_back("unknown term '" + term + "' ignored");

  const auto& kernels = kernels::active();
  const std::size_t n_docs = index.n_docs();
  std::vector<double> dense(index.vocabulary().size(), 0.0);
  for (std::size_t i = 0; i < qv.vector.size(); ++i) dense[qv.vector.positions()[i]] = qv.vector.weights()[i];
  const double qnorm = norm(qv.vector);

  // With a positive threshold only documents sharing a term can qualify.
  std::vector<std::uint32_t> candidates;
  if (query.threshold > 0.0) {
    std::vector<bool> mark(n_docs, false);
    for (TermId term : qv.vector.positions()) {
      for (std::uint32_t d : index.postings(term)) {
        if (!mark[d]) {
          mark[d] = true;
          candidates.push_back(d);
        }
      }
    }
  } else {
    candidates.resize(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) candidates[d] = static_cast<std::uint32_t>(d);
  }

  const auto& lengths = index.doc_lengths();
  const auto norms = index.doc_norms();
  for (std::uint32_t d : candidates) {
    if (lengths[d] < query.min_terms) continue;
    double score = 0.0;
    const double denom = qnorm * norms[d];
    if (denom > 0.0) {
      const auto& vec = index.doc_vectors()[d];
      const double dot = kernels.sparse_dense_dot(vec.positions().data(), vec.weights().data(), vec.size(),
                                                   dense.data());
      score = std::clamp(dot / denom, 0.0, 1.0);
    }
    if (score >= query.threshold) result.hits.push_back({index.doc_ids()[d], score, lengths[d]});
  }

  std::sort(result.hits.begin(), result.hits.end(), [](const Hit& a, const Hit& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
  });
  if (query.limit && result.hits.size() > *query.limit) result.hits.resize(*query.limit);
  return result;
}

}  // namespace topicnav
