#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "topicnav/lda.hpp"
#include "topicnav/text_pipeline.hpp"
#include "topicnav/vector_space.hpp"

namespace topicnav {

/// Artifact kinds of an experiment directory. Each depends on the ones
/// before it: corpus <- vocab <- index, vocab <- lda <- topics.
enum class ArtifactKind { Corpus, Vocab, Index, Lda, Topics, Eval };

std::string_view artifact_kind_name(ArtifactKind kind);
std::optional<ArtifactKind> parse_artifact_kind(std::string_view name);

struct ManifestEntry {
  std::string key;   // "corpus", "index", ..., "eval/<name>"
  std::string file;  // relative to the experiment root
  std::string sha256;
  std::uint64_t bytes = 0;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> depends_on;  // key -> sha256 at save time
};

struct ArtifactStatus {
  std::string key;
  std::string file;
  bool ok = true;
  std::string problem;
};

struct VerifyReport {
  bool manifest_ok = true;
  std::string manifest_problem;
  std::vector<ArtifactStatus> artifacts;

  bool ok() const;
};

std::string sha256_hex(std::string_view bytes);

/// Serialized forms used by the experiment directory.
namespace codec {
std::string encode_corpus(const std::vector<Document>& docs);
std::vector<Document> decode_corpus(std::string_view bytes);
std::string encode_vocabulary(const Vocabulary& vocab);
Vocabulary decode_vocabulary(std::string_view bytes);
/// Little-endian: 8-byte magic, u32 version, u32 reserved, u64 n_docs,
/// u64 vocab size, then per document its id, length and sparse vector.
std::string encode_index(const TermDocumentIndex& index);
TermDocumentIndex decode_index(std::string_view bytes, Vocabulary vocab);
/// Little-endian: 8-byte magic, u32 version, u32 flags, u64 M, u64 V, sampler
/// settings, u64 trace length, M x V row-major f64, then the trace.
std::string encode_model(const LdaModel& model);
LdaModel decode_model(std::string_view bytes);
}  // namespace codec

/// A versioned experiment directory: manifest.json plus artifact files.
/// Saving an artifact drops downstream entries that depended on its previous
/// contents. Readers only see artifacts whose hashes and dependencies check out.
class ExperimentDir {
 public:
  static constexpr int kManifestVersion = 1;

  /// Opens an existing experiment; throws MissingManifest.
  static ExperimentDir open(const std::filesystem::path& root);
  /// Opens or initializes an experiment directory.
  static ExperimentDir create(const std::filesystem::path& root);

  const std::filesystem::path& root() const noexcept { return root_; }
  bool has(std::string_view key) const;
  const ManifestEntry& entry(std::string_view key) const;
  std::vector<std::string> keys() const;

  /// Writes the payload atomically and records it in the manifest.
  const ManifestEntry& save_artifact(ArtifactKind kind, std::string_view payload,
                                     nlohmann::json config = nlohmann::json::object(),
                                     std::string_view eval_name = {});
  /// Reads an artifact after checking its hash and its dependency chain.
  std::string load_artifact(ArtifactKind kind, std::string_view eval_name = {}) const;
  /// Recomputes every hash; never modifies the directory.
  VerifyReport verify() const;
  static VerifyReport verify(const std::filesystem::path& root);

  void save_corpus(const std::vector<Document>& docs, nlohmann::json config);
  std::vector<Document> load_corpus() const;
  void save_vocabulary(const Vocabulary& vocab, nlohmann::json config);
  Vocabulary load_vocabulary() const;
  void save_index(const TermDocumentIndex& index);
  TermDocumentIndex load_index() const;
  void save_model(const LdaModel& model, nlohmann::json config);
  LdaModel load_model() const;
  void save_topics(const nlohmann::json& topics, nlohmann::json config);
  nlohmann::json load_topics() const;
  void save_eval(std::string_view name, const nlohmann::json& report, nlohmann::json config);
  nlohmann::json load_eval(std::string_view name) const;

  /// Re-reads manifest.json from disk.
  void reload();

 private:
  explicit ExperimentDir(std::filesystem::path root) : root_(std::move(root)) {}
  void write_manifest() const;
  void drop_stale_dependents();

  std::filesystem::path root_;
  std::map<std::string, ManifestEntry, std::less<>> entries_;
};

/// Exclusive writer lock (`.lock` in the experiment root). A lock left by a
/// dead process is reclaimed.
class ExperimentLock {
 public:
  explicit ExperimentLock(const std::filesystem::path& root);
  ~ExperimentLock();
  ExperimentLock(const ExperimentLock&) = delete;
  ExperimentLock& operator=(const ExperimentLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace topicnav
