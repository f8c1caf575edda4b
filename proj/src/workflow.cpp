#include "topicnav/workflow.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "topicnav/error.hpp"
#include "topicnav/evaluation.hpp"
#include "topicnav/serialize.hpp"
#include "topicnav/store.hpp"

namespace topicnav::workflow {

namespace {

Pipeline stored_pipeline(const ExperimentDir& dir) {
  auto [config, lexicon] = json_io::pipeline_config_from_json(dir.entry("corpus").config.at("pipeline"));
  return Pipeline(std::move(config), std::move(lexicon));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json ingest(const fs::path& exp, const IngestRequest& request) {
  Pipeline pipeline(request.pipeline, request.lexicon);
  std::vector<Document> docs =
      request.documents ? *request.documents : load_corpus(request.corpus_path, request.format);
  preprocess_corpus(docs, pipeline, request.threads);

  std::size_t empty = 0, tokens = 0;
  for (const auto& doc : docs) {
    empty += doc.tokens.empty() ? 1 : 0;
    tokens += doc.tokens.size();
  }

  ExperimentLock lock(exp);
  auto dir = ExperimentDir::create(exp);
  json config = {{"source", request.documents ? json("inline") : json(request.corpus_path.string())},
                 {"format", corpus_format_name(request.format)},
                 {"pipeline", json_io::pipeline_config_to_json(pipeline.config(), pipeline.lexicon())}};
  dir.save_corpus(docs, std::move(config));
  return {{"stage", "ingest"}, {"documents", docs.size()}, {"empty_documents", empty}, {"tokens", tokens}};
}

json build_index(const fs::path& exp, const IndexRequest& request) {
  ExperimentLock lock(exp);
  auto dir = ExperimentDir::open(exp);
  const auto docs = dir.load_corpus();
  const Vocabulary vocab = build_vocabulary(docs, request.min_df, request.max_df_ratio);
  const TermDocumentIndex index = topicnav::build_index(docs, vocab);
  dir.save_vocabulary(vocab, {{"min_df", request.min_df}, {"max_df_ratio", request.max_df_ratio}});
  dir.save_index(index);
  return {{"stage", "index"}, {"n_docs", index.n_docs()}, {"vocabulary_size", vocab.size()}};
}

void LdaOverrides::apply(LdaConfig& config) const {
  if (alpha) config.alpha = *alpha;
  if (beta) config.beta = *beta;
  if (iterations) config.iterations = *iterations;
  if (burn_in) config.burn_in = *burn_in;
  if (sample_lag) config.sample_lag = *sample_lag;
  if (seed) config.rng_seed = *seed;
}

namespace {

json model_config(std::size_t topics_of_interest, std::size_t fragment, const LdaConfig& config) {
  return {{"topics_of_interest", topics_of_interest}, {"fragment", fragment}, {"lda", json_io::lda_config_to_json(config)}};
}

}  // namespace

json fit_lda(const fs::path& exp, const LdaRequest& request, const FitOptions& options) {
  if (request.topics_of_interest < 1 || request.fragment < 1) {
    throw Error(ErrorCode::InvalidArgument, "N and n must both be >= 1");
  }
  LdaConfig config;
  config.n_topics = request.topics_of_interest * request.fragment;
  request.overrides.apply(config);
  config.validate();

  ExperimentLock lock(exp);
  auto dir = ExperimentDir::open(exp);
  const auto docs = dir.load_corpus();
  const auto vocab = dir.load_vocabulary();
  const LdaModel model = topicnav::fit_lda(docs, vocab, config, options);
  dir.save_model(model, model_config(request.topics_of_interest, request.fragment, config));
  const auto& trace = model.log_likelihood_trace();
  return {{"stage", "lda"},
          {"n_topics", model.n_topics()},
          {"vocabulary_size", model.vocab_size()},
          {"alpha", model.config().resolved_alpha()},
          {"final_log_likelihood", trace.empty() ? json() : json(trace.back())},
          {"sha256", dir.entry("lda").sha256}};
}

json induce(const fs::path& exp, const InduceRequest& request, const InductionOptions& options) {
  ExperimentLock lock(exp);
  auto dir = ExperimentDir::open(exp);
  const Pipeline pipeline = stored_pipeline(dir);

  SeedSpec spec;
  spec.k = request.k;
  spec.n_start = request.n_start;
  spec.n_max = request.n_max;
  spec.seed_floor = request.seed_floor;
  spec.aggregation = request.aggregation;
  for (const auto& raw : request.seeds) {
    auto term = pipeline.process_term(raw);
    if (!term) throw Error(ErrorCode::InvalidArgument, "seed '" + raw + "' does not survive preprocessing");
    spec.seeds.push_back(std::move(*term));
  }
  spec.validate();

  const auto docs = dir.load_corpus();
  const auto vocab = dir.load_vocabulary();

  LdaConfig lda_template;
  InductionOptions run = options;
  if (dir.has("lda")) {
    const auto& stored = dir.entry("lda").config;
    if (stored.contains("lda")) lda_template = json_io::lda_config_from_json(stored.at("lda"));
    auto model = std::make_shared<const LdaModel>(dir.load_model());
    if (!run.initial_model) run.initial_model = model;
  }
  const bool has_overrides = request.overrides.alpha || request.overrides.beta || request.overrides.iterations ||
                             request.overrides.burn_in || request.overrides.sample_lag || request.overrides.seed;
  if (has_overrides) run.initial_model.reset();
  request.overrides.apply(lda_template);

  const InductionResult result = induce_topics(docs, vocab, spec, lda_template, run);
  if (result.model != run.initial_model || !dir.has("lda")) {
    LdaConfig used = lda_template;
    used.n_topics = result.model->n_topics();
    dir.save_model(*result.model, model_config(spec.seeds.size(), result.final_n, used));
  }
  json topics = json_io::induced_topics_to_json(result, spec, request.seeds, dir.entry("lda").sha256);
  dir.save_topics(topics, {{"seeds", spec.seeds}, {"k", spec.k}, {"n_start", spec.n_start}, {"n_max", spec.n_max}});
  return topics;
}

void QueryRequest::validate() const {
  if (terms.empty() == !topic.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "give either query terms or a topic, not both");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0, 1]");
  if (limit && *limit == 0) throw Error(ErrorCode::InvalidArgument, "limit must be >= 1");
  if (group_weighted && !topic) throw Error(ErrorCode::InvalidArgument, "group weighting needs a topic");
}

std::string manifest_digest(const fs::path& exp) {
  std::error_code ec;
  if (!fs::exists(exp / "manifest.json", ec)) return {};
  return sha256_hex(read_text(exp / "manifest.json"));
}

std::shared_ptr<const Snapshot> Snapshot::load(const fs::path& exp) {
  auto dir = ExperimentDir::open(exp);
  if (!dir.has("index") || !dir.has("corpus")) {
    throw Error(ErrorCode::IndexNotReady, "the index of " + exp.string() + " has not been built");
  }
  auto snap = std::make_shared<Snapshot>();
  snap->manifest_digest = workflow::manifest_digest(exp);
  snap->pipeline = std::make_unique<Pipeline>(stored_pipeline(dir));
  snap->index = dir.load_index();
  snap->documents = dir.load_corpus();
  if (dir.has("topics")) snap->topics = dir.load_topics();
  return snap;
}

const Document* Snapshot::document(std::string_view id) const {
  auto it = std::find_if(documents.begin(), documents.end(), [&](const Document& d) { return d.id == id; });
  return it == documents.end() ? nullptr : &*it;
}

json query(const Snapshot& snapshot, const QueryRequest& request) {
  request.validate();
  TopicalQuery q;
  q.threshold = request.threshold;
  q.min_terms = request.min_terms;
  q.limit = request.limit;
  std::vector<std::string> warnings;

  if (request.topic) {
    if (!snapshot.topics) throw Error(ErrorCode::NotFound, "no induced topics have been built");
    const auto processed = snapshot.pipeline->process_term(*request.topic);
    const json* match = nullptr;
    const auto& topics = snapshot.topics->at("topics");
    for (std::size_t i = 0; i < topics.size(); ++i) {
      const auto& seed = topics[i].at("seed").get_ref<const std::string&>();
      const auto& inputs = snapshot.topics->at("seed_inputs");
      const bool by_input = i < inputs.size() && inputs[i] == *request.topic;
      if (seed == *request.topic || (processed && seed == *processed) || by_input) {
        match = &topics[i];
        break;
      }
    }
    if (!match) throw Error(ErrorCode::NotFound, "no induced topic for seed '" + *request.topic + "'");
    for (const auto& entry : match->at("signature")) {
      q.terms.push_back(entry.at("term").get<std::string>());
      q.term_weights.push_back(entry.at("weight").get<double>());
    }
    if (request.group_weighted) {
      q.weighting = QueryWeighting::GroupWeight;
    } else {
      q.term_weights.clear();
    }
  } else {
    for (const auto& raw : request.terms) {
      if (auto term = snapshot.pipeline->process_term(raw)) {
        q.terms.push_back(std::move(*term));
      } else {
        warnings.push_back("term '" + raw + "' removed by preprocessing");
      }
    }
    if (q.terms.empty()) throw Error(ErrorCode::AllTermsUnknown, "no query term survives preprocessing");
  }

  RetrievalResult result = retrieve(q, snapshot.index);
  result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
  return json_io::retrieval_to_json(result);
}

json query(const fs::path& exp, const QueryRequest& request) {
  request.validate();
  return query(*Snapshot::load(exp), request);
}

json document(const Snapshot& snapshot, std::string_view doc_id) {
  const Document* doc = snapshot.document(doc_id);
  if (!doc) throw Error(ErrorCode::NotFound, "no document '" + std::string(doc_id) + "'");
  return json_io::document_to_json(*doc);
}

json evaluate(const fs::path& exp, const EvalRequest& request) {
  const json predictions = json::parse(read_text(request.predictions), nullptr, false);
  if (predictions.is_discarded()) throw Error(ErrorCode::MalformedRecord, "predictions file is not JSON");
  const auto ranked = json_io::ranked_ids_from_json(predictions);

  ExperimentLock lock(exp);
  auto dir = ExperimentDir::open(exp);
  const auto docs = dir.load_corpus();
  GroundTruth truth = GroundTruth::load(request.truth, docs.size());
  truth.corpus_ids.emplace();
  for (const auto& doc : docs) truth.corpus_ids->insert(doc.id);

  const json report = json_io::evaluation_to_json(topicnav::evaluate(ranked, truth, request.top_k));
  dir.save_eval(request.name, report,
                {{"truth", request.truth.string()}, {"predictions", request.predictions.string()}, {"top_k", request.top_k}});
  return report;
}

}  // namespace topicnav::workflow
