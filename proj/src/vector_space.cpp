#include "topicnav/vector_space.hpp"

#include <algorithm>
#include <cmath>

#include "topicnav/error.hpp"
#include "topicnav/kernels.hpp"

namespace topicnav {

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df)
    : terms_(std::move(terms)), df_(std::move(df)) {
  if (terms_.size() != df_.size()) {
    throw Error(ErrorCode::InvalidArgument, "vocabulary terms and df differ in length");
  }
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (df_[i] < 1) throw Error(ErrorCode::InvalidArgument, "term '" + terms_[i] + "' has df 0");
    if (!index_.emplace(terms_[i], static_cast<TermId>(i)).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

const std::string& Vocabulary::term(TermId id) const {
  if (id >= terms_.size()) throw Error(ErrorCode::OutOfRange, "term id out of range");
  return terms_[id];
}

std::uint32_t Vocabulary::df(TermId id) const {
  if (id >= df_.size()) throw Error(ErrorCode::OutOfRange, "term id out of range");
  return df_[id];
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const Document> docs, std::uint32_t min_df, double max_df_ratio) {
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build a vocabulary from an empty corpus");
  if (min_df < 1) throw Error(ErrorCode::InvalidArgument, "min_df must be >= 1");
  if (!(max_df_ratio > 0.0 && max_df_ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "max_df_ratio must be in (0, 1]");
  }

  std::vector<std::string> order;
  std::unordered_map<std::string_view, std::pair<std::uint32_t, std::size_t>> counts;  // df, last doc
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& token : docs[d].tokens) {
      auto [it, inserted] = counts.try_emplace(token, 0u, d);
      if (inserted) {
        order.push_back(token);
        it->second = {1u, d};
      } else if (it->second.second != d) {
        it->second = {it->second.first + 1, d};
      }
    }
  }

  const double max_df = max_df_ratio * static_cast<double>(docs.size());
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  for (auto& term : order) {
    const std::uint32_t count = counts.at(term).first;
    if (count >= min_df && static_cast<double>(count) <= max_df) {
      df.push_back(count);
      terms.push_back(std::move(term));
    }
  }
  return Vocabulary(std::move(terms), std::move(df));
}

double tfidf_weight(double tf, double df, double n_docs) {
  if (!(tf >= 1.0) || !(df >= 1.0) || !(df <= n_docs)) {
    throw Error(ErrorCode::InvalidArgument, "tfidf_weight requires tf >= 1 and 1 <= df <= n_docs");
  }
  return tf * std::log(n_docs / df);
}

// ---- sparse vectors ----------------------------------------------------------

SparseVector SparseVector::from_entries(std::vector<std::pair<TermId, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector v;
  v.positions_.reserve(entries.size());
  v.weights_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [pos, w] = entries[i];
    if (i > 0 && entries[i - 1].first == pos) {
      throw Error(ErrorCode::InvalidArgument, "duplicate sparse vector position");
    }
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "sparse vector weights must be finite and non-negative");
    }
    if (w == 0.0) continue;
    v.positions_.push_back(pos);
    v.weights_.push_back(w);
  }
  return v;
}

double SparseVector::at(TermId position) const {
  auto it = std::lower_bound(positions_.begin(), positions_.end(), position);
  if (it == positions_.end() || *it != position) return 0.0;
  return weights_[static_cast<std::size_t>(it - positions_.begin())];
}

SparseVector SparseVector::scaled(double factor) const {
  std::vector<std::pair<TermId, double>> entries;
  entries.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) entries.emplace_back(positions_[i], weights_[i] * factor);
  return from_entries(std::move(entries));
}

double norm(const SparseVector& x) {
  const auto w = x.weights();
  return std::sqrt(kernels::active().sum_squares(w.data(), w.size()));
}

double cosine(const SparseVector& x, const SparseVector& y) {
  if (x.empty() || y.empty()) return 0.0;
  const auto xp = x.positions(), yp = y.positions();
  const auto xw = x.weights(), yw = y.weights();
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xp.size() && j < yp.size()) {
    if (xp[i] < yp[j]) {
      ++i;
    } else if (yp[j] < xp[i]) {
      ++j;
    } else {
      dot += xw[i++] * yw[j++];
    }
  }
  const double denom = norm(x) * norm(y);
  if (denom == 0.0) return 0.0;
  return std::clamp(dot / denom, 0.0, 1.0);
}

// ---- term-document index -----------------------------------------------------

TermDocumentIndex::TermDocumentIndex(Vocabulary vocabulary, std::vector<std::string> doc_ids,
                                     std::vector<SparseVector> doc_vectors,
                                     std::vector<std::uint32_t> doc_lengths)
    : vocabulary_(std::move(vocabulary)),
      doc_ids_(std::move(doc_ids)),
      doc_vectors_(std::move(doc_vectors)),
      doc_lengths_(std::move(doc_lengths)) {
  if (doc_ids_.size() != doc_vectors_.size() || doc_ids_.size() != doc_lengths_.size()) {
    throw Error(ErrorCode::InvalidArgument, "index columns differ in length");
  }
  postings_.resize(vocabulary_.size());
  doc_norms_.resize(doc_ids_.size());
  slots_.reserve(doc_ids_.size());
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    if (!slots_.emplace(doc_ids_[d], d).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate document id '" + doc_ids_[d] + "'");
    }
    const auto& vec = doc_vectors_[d];
    for (TermId pos : vec.positions()) {
      if (pos >= vocabulary_.size()) throw Error(ErrorCode::InvalidArgument, "vector position outside vocabulary");
      postings_[pos].push_back(static_cast<std::uint32_t>(d));
    }
    doc_norms_[d] = norm(vec);
  }
}

std::optional<std::size_t> TermDocumentIndex::slot(std::string_view doc_id) const {
  auto it = slots_.find(doc_id);
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::uint32_t> TermDocumentIndex::postings(TermId term) const {
  if (term >= postings_.size()) throw Error(ErrorCode::OutOfRange, "term id out of range");
  return postings_[term];
}

TermDocumentIndex build_index(std::span<const Document> docs, const Vocabulary& vocab) {
  const double n_docs = static_cast<double>(docs.size());
  std::vector<std::string> ids;
  std::vector<SparseVector> vectors;
  std::vector<std::uint32_t> lengths;
  ids.reserve(docs.size());
  vectors.reserve(docs.size());
  lengths.reserve(docs.size());

  std::unordered_map<TermId, std::uint32_t> tf;
  for (const auto& doc : docs) {
    tf.clear();
    for (const auto& token : doc.tokens) {
      if (auto id = vocab.find(token)) ++tf[*id];
    }
    std::vector<std::pair<TermId, double>> entries;
    entries.reserve(tf.size());
    for (const auto& [term, count] : tf) {
      entries.emplace_back(term, tfidf_weight(count, vocab.df(term), n_docs));
    }
    ids.push_back(doc.id);
    vectors.push_back(SparseVector::from_entries(std::move(entries)));
    lengths.push_back(static_cast<std::uint32_t>(doc.tokens.size()));
  }
  return TermDocumentIndex(vocab, std::move(ids), std::move(vectors), std::move(lengths));
}

}  // namespace topicnav
