#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicnav/induction.hpp"
#include "topicnav/lda.hpp"
#include "topicnav/retrieval.hpp"
#include "topicnav/text_pipeline.hpp"
#include "topicnav/vector_space.hpp"

// Pipeline stages over an experiment directory. The CLI subcommands and the
// service endpoints are thin wrappers around these, so both produce the same
// artifacts and the same JSON.
namespace topicnav::workflow {

namespace fs = std::filesystem;
using nlohmann::json;

struct IngestRequest {
  fs::path corpus_path;
  CorpusFormat format = CorpusFormat::Jsonl;
  /// When set, used instead of reading corpus_path.
  std::optional<std::vector<Document>> documents;
  PipelineConfig pipeline;
  LexiconTable lexicon;
  unsigned threads = 0;
};

/// Loads and preprocesses the corpus, then stores it. Returns a summary.
json ingest(const fs::path& exp, const IngestRequest& request);

struct IndexRequest {
  std::uint32_t min_df = 2;
  double max_df_ratio = 0.5;
};

/// Builds and stores the vocabulary and the TF-IDF index.
json build_index(const fs::path& exp, const IndexRequest& request);

struct LdaOverrides {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> sample_lag;
  std::optional<std::uint64_t> seed;

  void apply(LdaConfig& config) const;
};

struct LdaRequest {
  std::size_t topics_of_interest = 1;  // N
  std::size_t fragment = 2;            // n; the model gets n * N topics
  LdaOverrides overrides;
};

json fit_lda(const fs::path& exp, const LdaRequest& request, const FitOptions& options = {});

struct InduceRequest {
  std::vector<std::string> seeds;  // as typed by the user
  std::size_t k = 10;
  std::size_t n_start = 2;
  std::size_t n_max = 8;
  std::optional<double> seed_floor;
  Aggregation aggregation = Aggregation::Sum;
  LdaOverrides overrides;
};

/// Runs the escalation loop (reusing a stored model of matching size), stores
/// the model and the induced-topics document, and returns the latter.
json induce(const fs::path& exp, const InduceRequest& request, const InductionOptions& options = {});

struct QueryRequest {
  std::vector<std::string> terms;  // as typed by the user
  std::optional<std::string> topic;
  double threshold = 0.5;
  std::size_t min_terms = 0;
  std::optional<std::size_t> limit;
  bool group_weighted = false;

  /// Checks everything that does not need the experiment.
  void validate() const;
};

/// Read-only view of the last completed artifacts needed to serve queries.
struct Snapshot {
  std::unique_ptr<Pipeline> pipeline;
  TermDocumentIndex index;
  std::vector<Document> documents;
  std::optional<json> topics;
  std::string manifest_digest;

  /// Throws IndexNotReady when the index has not been built.
  static std::shared_ptr<const Snapshot> load(const fs::path& exp);
  const Document* document(std::string_view id) const;
};

json query(const Snapshot& snapshot, const QueryRequest& request);
json query(const fs::path& exp, const QueryRequest& request);
json document(const Snapshot& snapshot, std::string_view doc_id);

struct EvalRequest {
  fs::path truth;
  fs::path predictions;
  std::size_t top_k = 20;
  std::string name = "default";
};

json evaluate(const fs::path& exp, const EvalRequest& request);

/// Digest of manifest.json, used to detect newly published artifacts.
std::string manifest_digest(const fs::path& exp);

}  // namespace topicnav::workflow
