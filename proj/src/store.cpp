#include "topicnav/store.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "topicnav/error.hpp"

namespace topicnav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestFile = "manifest.json";
constexpr std::string_view kManifestFormat = "topicnav-experiment";
constexpr std::array<char, 8> kIndexMagic = {'T', 'N', 'A', 'V', 'I', 'D', 'X', '\0'};
constexpr std::array<char, 8> kModelMagic = {'T', 'N', 'A', 'V', 'L', 'D', 'A', '\0'};
constexpr std::uint32_t kBinaryVersion = 1;

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) { out_.append(static_cast<const char*>(data), n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    auto s = raw(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }
  std::uint64_t u64() {
    auto s = raw(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() { return std::string(raw(u32())); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::Io, "truncated artifact");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void check_header(ByteReader& in, const std::array<char, 8>& magic, std::string_view what) {
  if (in.raw(8) != std::string_view(magic.data(), magic.size())) {
    throw Error(ErrorCode::Io, std::string(what) + " has a bad magic number");
  }
  if (const auto version = in.u32(); version != kBinaryVersion) {
    throw Error(ErrorCode::VersionMismatch,
                std::string(what) + " version " + std::to_string(version) + " is not supported");
  }
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot publish " + path.string() + ": " + ec.message());
}

std::vector<ArtifactKind> dependencies_of(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::Corpus: return {};
    case ArtifactKind::Vocab: return {ArtifactKind::Corpus};
    case ArtifactKind::Index: return {ArtifactKind::Corpus, ArtifactKind::Vocab};
    case ArtifactKind::Lda: return {ArtifactKind::Corpus, ArtifactKind::Vocab};
    case ArtifactKind::Topics: return {ArtifactKind::Vocab, ArtifactKind::Lda};
    case ArtifactKind::Eval: return {ArtifactKind::Corpus};
  }
  return {};
}

std::string file_for(ArtifactKind kind, std::string_view eval_name) {
  switch (kind) {
    case ArtifactKind::Corpus: return "corpus.tokens";
    case ArtifactKind::Vocab: return "vocab.tsv";
    case ArtifactKind::Index: return "index.bin";
    case ArtifactKind::Lda: return "lda.bin";
    case ArtifactKind::Topics: return "topics.json";
    case ArtifactKind::Eval: return "eval/" + std::string(eval_name) + ".json";
  }
  return {};
}

std::string key_for(ArtifactKind kind, std::string_view eval_name) {
  if (kind == ArtifactKind::Eval) {
    const bool valid = !eval_name.empty() && eval_name.find("..") == std::string_view::npos &&
                       std::all_of(eval_name.begin(), eval_name.end(), [](char c) {
                         return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
                       });
    if (!valid) throw Error(ErrorCode::InvalidArgument, "invalid evaluation name '" + std::string(eval_name) + "'");
    return "eval/" + std::string(eval_name);
  }
  return std::string(artifact_kind_name(kind));
}

json entry_to_json(const ManifestEntry& e) {
  json deps = json::object();
  for (const auto& [k, v] : e.depends_on) deps[k] = v;
  return {{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}, {"config", e.config}, {"depends_on", deps}};
}

ManifestEntry entry_from_json(const std::string& key, const json& j) {
  ManifestEntry e;
  e.key = key;
  e.file = j.at("file").get<std::string>();
  e.sha256 = j.at("sha256").get<std::string>();
  e.bytes = j.at("bytes").get<std::uint64_t>();
  e.config = j.value("config", json::object());
  const json deps = j.value("depends_on", json::object());
  for (const auto& [k, v] : deps.items()) e.depends_on[k] = v.get<std::string>();
  return e;
}

}  // namespace

std::string_view artifact_kind_name(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::Corpus: return "corpus";
    case ArtifactKind::Vocab: return "vocab";
    case ArtifactKind::Index: return "index";
    case ArtifactKind::Lda: return "lda";
    case ArtifactKind::Topics: return "topics";
    case ArtifactKind::Eval: return "eval";
  }
  return "unknown";
}

std::optional<ArtifactKind> parse_artifact_kind(std::string_view name) {
  for (auto kind : {ArtifactKind::Corpus, ArtifactKind::Vocab, ArtifactKind::Index, ArtifactKind::Lda,
                    ArtifactKind::Topics, ArtifactKind::Eval}) {
    if (artifact_kind_name(kind) == name) return kind;
  }
  return std::nullopt;
}

bool VerifyReport::ok() const {
  return manifest_ok && std::all_of(artifacts.begin(), artifacts.end(), [](const auto& a) { return a.ok; });
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---- codecs --------------------------------------------------------------------

namespace codec {

std::string encode_corpus(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    json j = {{"id", doc.id}};
    if (doc.date) j["date"] = format_iso_date(*doc.date);
    j["text"] = doc.raw_text;
    j["tokens"] = doc.tokens;
    out += dump(j);
    out.push_back('\n');
  }
  return out;
}

std::vector<Document> decode_corpus(std::string_view bytes) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  while (!bytes.empty()) {
    const auto nl = bytes.find('\n');
    const auto line = bytes.substr(0, nl);
    bytes.remove_prefix(nl == std::string_view::npos ? bytes.size() : nl + 1);
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::MalformedRecord, "corpus.tokens:" + std::to_string(line_no) + ": bad record");
    }
    Document doc;
    doc.id = j.at("id").get<std::string>();
    if (auto it = j.find("date"); it != j.end()) doc.date = parse_iso_date(it->get<std::string>());
    doc.raw_text = j.at("text").get<std::string>();
    doc.tokens = j.at("tokens").get<std::vector<std::string>>();
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string encode_vocabulary(const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out += vocab.terms()[i];
    out.push_back('\t');
    out += std::to_string(vocab.document_frequencies()[i]);
    out.push_back('\n');
  }
  return out;
}

Vocabulary decode_vocabulary(std::string_view bytes) {
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  std::size_t line_no = 0;
  while (!bytes.empty()) {
    const auto nl = bytes.find('\n');
    const auto line = bytes.substr(0, nl);
    bytes.remove_prefix(nl == std::string_view::npos ? bytes.size() : nl + 1);
    ++line_no;
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::MalformedRecord, "vocab.tsv:" + std::to_string(line_no) + ": expected term<TAB>df");
    }
    terms.emplace_back(line.substr(0, tab));
    df.push_back(static_cast<std::uint32_t>(std::stoul(std::string(line.substr(tab + 1)))));
  }
  return Vocabulary(std::move(terms), std::move(df));
}

std::string encode_index(const TermDocumentIndex& index) {
  ByteWriter out;
  out.raw(kIndexMagic.data(), kIndexMagic.size());
  out.u32(kBinaryVersion);
  out.u32(0);
  out.u64(index.n_docs());
  out.u64(index.vocabulary().size());
  for (std::size_t d = 0; d < index.n_docs(); ++d) {
    const auto& vec = index.doc_vectors()[d];
    out.str(index.doc_ids()[d]);
    out.u32(index.doc_lengths()[d]);
    out.u32(static_cast<std::uint32_t>(vec.size()));
    for (TermId p : vec.positions()) out.u32(p);
    for (double w : vec.weights()) out.f64(w);
  }
  return out.take();
}

TermDocumentIndex decode_index(std::string_view bytes, Vocabulary vocab) {
  ByteReader in(bytes);
  check_header(in, kIndexMagic, "index.bin");
  in.u32();
  const std::uint64_t n_docs = in.u64();
  const std::uint64_t vocab_size = in.u64();
  if (vocab_size != vocab.size()) {
    throw Error(ErrorCode::MissingDependency, "index.bin was built for a different vocabulary");
  }
  std::vector<std::string> ids;
  std::vector<SparseVector> vectors;
  std::vector<std::uint32_t> lengths;
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    ids.push_back(in.str());
    lengths.push_back(in.u32());
    const std::uint32_t nnz = in.u32();
    std::vector<std::pair<TermId, double>> entries(nnz);
    for (auto& e : entries) e.first = in.u32();
    for (auto& e : entries) e.second = in.f64();
    vectors.push_back(SparseVector::from_entries(std::move(entries)));
  }
  if (!in.done()) throw Error(ErrorCode::Io, "index.bin has trailing bytes");
  return TermDocumentIndex(std::move(vocab), std::move(ids), std::move(vectors), std::move(lengths));
}

std::string encode_model(const LdaModel& model) {
  const auto& c = model.config();
  ByteWriter out;
  out.raw(kModelMagic.data(), kModelMagic.size());
  out.u32(kBinaryVersion);
  out.u32(c.use_last_sweep ? 1u : 0u);
  out.u64(model.n_topics());
  out.u64(model.vocab_size());
  out.f64(c.resolved_alpha());
  out.f64(c.beta);
  out.u64(c.iterations);
  out.u64(c.burn_in);
  out.u64(c.sample_lag);
  out.u64(c.ll_interval);
  out.u64(c.rng_seed);
  out.u64(model.log_likelihood_trace().size());
  for (double v : model.topic_word()) out.f64(v);
  for (double v : model.log_likelihood_trace()) out.f64(v);
  return out.take();
}

LdaModel decode_model(std::string_view bytes) {
  ByteReader in(bytes);
  check_header(in, kModelMagic, "lda.bin");
  LdaConfig c;
  c.use_last_sweep = (in.u32() & 1u) != 0;
  c.n_topics = in.u64();
  const std::uint64_t vocab_size = in.u64();
  c.alpha = in.f64();
  c.beta = in.f64();
  c.iterations = in.u64();
  c.burn_in = in.u64();
  c.sample_lag = in.u64();
  c.ll_interval = in.u64();
  c.rng_seed = in.u64();
  const std::uint64_t trace_len = in.u64();
  if (c.n_topics == 0 || vocab_size == 0 || c.n_topics > (bytes.size() / 8) / vocab_size) {
    throw Error(ErrorCode::Io, "lda.bin has an inconsistent shape");
  }
  std::vector<double> phi(c.n_topics * vocab_size);
  for (double& v : phi) v = in.f64();
  std::vector<double> trace(trace_len);
  for (double& v : trace) v = in.f64();
  if (!in.done()) throw Error(ErrorCode::Io, "lda.bin has trailing bytes");
  return LdaModel(c, vocab_size, std::move(phi), std::move(trace));
}

}  // namespace codec

// ---- experiment directory --------------------------------------------------------

ExperimentDir ExperimentDir::open(const fs::path& root) {
  ExperimentDir dir(root);
  dir.reload();
  return dir;
}

ExperimentDir ExperimentDir::create(const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + root.string() + ": " + ec.message());
  if (fs::exists(root / kManifestFile)) return open(root);
  ExperimentDir dir(root);
  dir.write_manifest();
  return dir;
}

void ExperimentDir::reload() {
  const fs::path path = root_ / kManifestFile;
  if (!fs::exists(path)) throw Error(ErrorCode::MissingManifest, "no manifest.json in " + root_.string());
  json manifest = json::parse(read_bytes(path), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object() || manifest.value("format", "") != kManifestFormat) {
    throw Error(ErrorCode::MissingManifest, "manifest.json in " + root_.string() + " is not a topicnav manifest");
  }
  if (manifest.value("version", 0) != kManifestVersion) {
    throw Error(ErrorCode::VersionMismatch, "unsupported manifest version " + manifest.value("version", json()).dump());
  }
  std::map<std::string, ManifestEntry, std::less<>> entries;
  try {
    for (const auto& [key, value] : manifest.at("artifacts").items()) entries.emplace(key, entry_from_json(key, value));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MissingManifest, std::string("malformed manifest.json: ") + e.what());
  }
  entries_ = std::move(entries);
}

void ExperimentDir::write_manifest() const {
  json artifacts = json::object();
  for (const auto& [key, e] : entries_) artifacts[key] = entry_to_json(e);
  json manifest = {{"format", kManifestFormat}, {"version", kManifestVersion}, {"artifacts", artifacts}};
  write_atomic(root_ / kManifestFile, manifest.dump(2) + "\n");
}

bool ExperimentDir::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

const ManifestEntry& ExperimentDir::entry(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorCode::NotFound, "artifact '" + std::string(key) + "' has not been built");
  return it->second;
}

std::vector<std::string> ExperimentDir::keys() const {
  std::vector<std::string> out;
  for (const auto& [key, e] : entries_) out.push_back(key);
  return out;
}

void ExperimentDir::drop_stale_dependents() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = entries_.begin(); it != entries_.end();) {
      const bool stale = std::any_of(it->second.depends_on.begin(), it->second.depends_on.end(), [&](const auto& dep) {
        auto found = entries_.find(dep.first);
        return found == entries_.end() || found->second.sha256 != dep.second;
      });
      if (stale) {
        std::error_code ec;
        fs::remove(root_ / it->second.file, ec);
        it = entries_.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
}

const ManifestEntry& ExperimentDir::save_artifact(ArtifactKind kind, std::string_view payload, json config,
                                                  std::string_view eval_name) {
  ManifestEntry e;
  e.key = key_for(kind, eval_name);
  e.file = file_for(kind, eval_name);
  for (ArtifactKind dep : dependencies_of(kind)) {
    const auto dep_key = std::string(artifact_kind_name(dep));
    auto it = entries_.find(dep_key);
    if (it == entries_.end()) {
      throw Error(ErrorCode::MissingDependency,
                  "cannot save '" + e.key + "' before '" + dep_key + "' exists");
    }
    e.depends_on[dep_key] = it->second.sha256;
  }
  e.sha256 = sha256_hex(payload);
  e.bytes = payload.size();
  e.config = std::move(config);
  write_atomic(root_ / e.file, payload);
  entries_[e.key] = e;
  drop_stale_dependents();
  write_manifest();
  return entries_.at(e.key);
}

std::string ExperimentDir::load_artifact(ArtifactKind kind, std::string_view eval_name) const {
  const auto& e = entry(key_for(kind, eval_name));
  for (const auto& [dep, hash] : e.depends_on) {
    auto it = entries_.find(dep);
    if (it == entries_.end() || it->second.sha256 != hash) {
      throw Error(ErrorCode::MissingDependency, "'" + e.key + "' depends on a missing or changed '" + dep + "'");
    }
  }
  std::string bytes = read_bytes(root_ / e.file);
  if (sha256_hex(bytes) != e.sha256) {
    throw Error(ErrorCode::HashMismatch, e.file + " does not match its manifest hash");
  }
  return bytes;
}

VerifyReport ExperimentDir::verify() const {
  VerifyReport report;
  for (const auto& [key, e] : entries_) {
    ArtifactStatus status{key, e.file, true, {}};
    std::error_code ec;
    if (!fs::exists(root_ / e.file, ec)) {
      status = {key, e.file, false, "file missing"};
    } else {
      try {
        if (sha256_hex(read_bytes(root_ / e.file)) != e.sha256) status = {key, e.file, false, "hash mismatch"};
      } catch (const Error& err) {
        status = {key, e.file, false, err.what()};
      }
    }
    for (const auto& [dep, hash] : e.depends_on) {
      auto it = entries_.find(dep);
      if (status.ok && (it == entries_.end() || it->second.sha256 != hash)) {
        status = {key, e.file, false, "dependency '" + dep + "' missing or changed"};
      }
    }
    report.artifacts.push_back(std::move(status));
  }
  return report;
}

VerifyReport ExperimentDir::verify(const fs::path& root) {
  try {
    return open(root).verify();
  } catch (const Error& e) {
    VerifyReport report;
    report.manifest_ok = false;
    report.manifest_problem = e.what();
    return report;
  }
}

void ExperimentDir::save_corpus(const std::vector<Document>& docs, json config) {
  save_artifact(ArtifactKind::Corpus, codec::encode_corpus(docs), std::move(config));
}
std::vector<Document> ExperimentDir::load_corpus() const {
  return codec::decode_corpus(load_artifact(ArtifactKind::Corpus));
}
void ExperimentDir::save_vocabulary(const Vocabulary& vocab, json config) {
  save_artifact(ArtifactKind::Vocab, codec::encode_vocabulary(vocab), std::move(config));
}
Vocabulary ExperimentDir::load_vocabulary() const {
  return codec::decode_vocabulary(load_artifact(ArtifactKind::Vocab));
}
void ExperimentDir::save_index(const TermDocumentIndex& index) {
  if (!has("vocab") || codec::encode_vocabulary(index.vocabulary()) != load_artifact(ArtifactKind::Vocab)) {
    throw Error(ErrorCode::MissingDependency, "save the index vocabulary before the index");
  }
  save_artifact(ArtifactKind::Index, codec::encode_index(index));
}
TermDocumentIndex ExperimentDir::load_index() const {
  const std::string bytes = load_artifact(ArtifactKind::Index);
  return codec::decode_index(bytes, load_vocabulary());
}
void ExperimentDir::save_model(const LdaModel& model, json config) {
  save_artifact(ArtifactKind::Lda, codec::encode_model(model), std::move(config));
}
LdaModel ExperimentDir::load_model() const { return codec::decode_model(load_artifact(ArtifactKind::Lda)); }
void ExperimentDir::save_topics(const json& topics, json config) {
  save_artifact(ArtifactKind::Topics, topics.dump(2) + "\n", std::move(config));
}
json ExperimentDir::load_topics() const { return json::parse(load_artifact(ArtifactKind::Topics)); }
void ExperimentDir::save_eval(std::string_view name, const json& report, json config) {
  save_artifact(ArtifactKind::Eval, report.dump(2) + "\n", std::move(config), name);
}
json ExperimentDir::load_eval(std::string_view name) const {
  return json::parse(load_artifact(ArtifactKind::Eval, name));
}

// ---- lock ------------------------------------------------------------------------

ExperimentLock::ExperimentLock(const fs::path& root) : path_(root / ".lock") {
  std::error_code ec;
  fs::create_directories(root, ec);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const std::string pid = std::to_string(::getpid()) + "\n";
      [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      return;
    }
    if (errno != EEXIST) throw Error(ErrorCode::Io, "cannot create lock " + path_.string() + ": " + std::strerror(errno));
    long holder = 0;
    {
      std::ifstream in(path_);
      in >> holder;
    }
    const bool dead = holder > 0 && ::kill(static_cast<pid_t>(holder), 0) == -1 && errno == ESRCH;
    if (!dead) break;
    fs::remove(path_, ec);
  }
  throw Error(ErrorCode::Locked, "experiment " + root.string() + " is locked by another writer");
}

ExperimentLock::~ExperimentLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace topicnav
