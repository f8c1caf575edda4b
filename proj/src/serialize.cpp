#include "topicnav/serialize.hpp"

#include <algorithm>

namespace topicnav::json_io {

std::string to_text(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

namespace {

std::string_view noise_kind_name(NoiseRule::Kind kind) {
  switch (kind) {
    case NoiseRule::Kind::FewLetters: return "few_letters";
    case NoiseRule::Kind::ShortAlnumMix: return "short_alnum_mix";
    case NoiseRule::Kind::Symbols: return "symbols";
  }
  return "unknown";
}

NoiseRule::Kind parse_noise_kind(std::string_view name) {
  if (name == "few_letters") return NoiseRule::Kind::FewLetters;
  if (name == "short_alnum_mix") return NoiseRule::Kind::ShortAlnumMix;
  if (name == "symbols") return NoiseRule::Kind::Symbols;
  throw Error(ErrorCode::InvalidArgument, "unknown noise rule '" + std::string(name) + "'");
}

template <typename T>
T field(const json& j, const char* name, T fallback) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

json pipeline_config_to_json(const PipelineConfig& config, const LexiconTable& lexicon) {
  std::vector<std::string> stopwords(config.stopwords.begin(), config.stopwords.end());
  std::sort(stopwords.begin(), stopwords.end());
  json noise = json::array();
  for (const auto& rule : config.noise_rules) noise.push_back({{"kind", noise_kind_name(rule.kind)}, {"limit", rule.limit}});
  json stem = json::array();
  for (const auto& rule : config.stemmer_rules) stem.push_back({rule.suffix, rule.replacement});
  json lex = json::array();
  for (const auto& [variant, canonical] : lexicon.entries()) lex.push_back({variant, canonical});
  return {
      {"lowercase", config.lowercase},
      {"strip_diacritics", config.strip_diacritics},
      {"rejoin_hyphenation", config.rejoin_hyphenation},
      {"tokenizer", config.tokenizer == TokenizerMode::Words ? "words" : "letters"},
      {"min_token_len", config.min_token_len},
      {"noise_rules", noise},
      {"stopwords", stopwords},
      {"stemmer_rules", stem},
      {"lexicon", lex},
  };
}

std::pair<PipelineConfig, LexiconTable> pipeline_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "pipeline config must be an object");
  PipelineConfig config;
  config.lowercase = field(j, "lowercase", config.lowercase);
  config.strip_diacritics = field(j, "strip_diacritics", config.strip_diacritics);
  config.rejoin_hyphenation = field(j, "rejoin_hyphenation", config.rejoin_hyphenation);
  const auto tokenizer = field<std::string>(j, "tokenizer", "words");
  if (tokenizer != "words" && tokenizer != "letters") {
    throw Error(ErrorCode::InvalidArgument, "tokenizer must be 'words' or 'letters'");
  }
  config.tokenizer = tokenizer == "words" ? TokenizerMode::Words : TokenizerMode::Letters;
  config.min_token_len = field<std::size_t>(j, "min_token_len", config.min_token_len);
  if (auto it = j.find("noise_rules"); it != j.end() && !it->is_null()) {
    config.noise_rules.clear();
    for (const auto& rule : *it) {
      config.noise_rules.push_back({parse_noise_kind(rule.at("kind").get<std::string>()),
                                    rule.value("limit", std::size_t{0})});
    }
  }
  for (const auto& word : field(j, "stopwords", std::vector<std::string>{})) config.stopwords.insert(word);
  for (const auto& rule : field(j, "stemmer_rules", std::vector<std::vector<std::string>>{})) {
    if (rule.empty() || rule.size() > 2) throw Error(ErrorCode::InvalidArgument, "stemmer rule must be [suffix, replacement]");
    config.stemmer_rules.push_back({rule[0], rule.size() == 2 ? rule[1] : ""});
  }
  std::vector<std::pair<std::string, std::string>> lex;
  for (const auto& pair : field(j, "lexicon", std::vector<std::vector<std::string>>{})) {
    if (pair.size() != 2) throw Error(ErrorCode::InvalidArgument, "lexicon entry must be [variant, canonical]");
    lex.emplace_back(pair[0], pair[1]);
  }
  return {std::move(config), LexiconTable::from_entries(std::move(lex))};
}

json lda_config_to_json(const LdaConfig& c) {
  return {{"n_topics", c.n_topics},     {"alpha", c.alpha ? json(*c.alpha) : json()},
          {"beta", c.beta},             {"iterations", c.iterations},
          {"burn_in", c.burn_in},       {"sample_lag", c.sample_lag},
          {"rng_seed", c.rng_seed},     {"use_last_sweep", c.use_last_sweep},
          {"ll_interval", c.ll_interval}};
}

LdaConfig lda_config_from_json(const json& j) {
  LdaConfig c;
  c.n_topics = field<std::size_t>(j, "n_topics", c.n_topics);
  if (auto it = j.find("alpha"); it != j.end() && !it->is_null()) c.alpha = it->get<double>();
  c.beta = field(j, "beta", c.beta);
  c.iterations = field<std::size_t>(j, "iterations", c.iterations);
  c.burn_in = field<std::size_t>(j, "burn_in", c.burn_in);
  c.sample_lag = field<std::size_t>(j, "sample_lag", c.sample_lag);
  c.rng_seed = field<std::uint64_t>(j, "rng_seed", c.rng_seed);
  c.use_last_sweep = field(j, "use_last_sweep", c.use_last_sweep);
  c.ll_interval = field<std::size_t>(j, "ll_interval", c.ll_interval);
  return c;
}

std::string_view aggregation_name(Aggregation aggregation) {
  return aggregation == Aggregation::Sum ? "sum" : "max";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "sum") return Aggregation::Sum;
  if (name == "max") return Aggregation::Max;
  throw Error(ErrorCode::InvalidArgument, "aggregation must be 'sum' or 'max'");
}

json coverage_to_json(const CoverageReport& report) {
  json seeds = json::array();
  for (const auto& s : report.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"in_vocabulary", s.term.has_value()},
                     {"max_weight", s.max_weight},
                     {"best_topic", s.best_topic ? json(*s.best_topic) : json()},
                     {"covered", s.covered}});
  }
  return {{"seed_floor", report.seed_floor}, {"seeds", seeds}};
}

json induced_topics_to_json(const InductionResult& result, const SeedSpec& spec, const json& seed_inputs,
                            const std::string& model_sha256) {
  json topics = json::array();
  for (const auto& topic : result.signatures.topics) {
    json signature = json::array();
    for (std::size_t i = 0; i < topic.signature.size(); ++i) {
      signature.push_back({{"term", topic.signature[i]}, {"weight", topic.weights[i]}});
    }
    topics.push_back({{"seed", topic.seed}, {"member_topics", topic.member_topics}, {"signature", signature}});
  }
  json warnings = json::array();
  for (const auto& w : result.signatures.warnings) {
    warnings.push_back({{"seed", w.seed}, {"length", w.length}, {"message", w.message}});
  }
  json attempts = json::array();
  for (const auto& a : result.attempts) {
    attempts.push_back({{"n", a.n}, {"n_topics", a.n_topics}, {"coverage", coverage_to_json(a.coverage)}});
  }
  return {
      {"seeds", spec.seeds},
      {"seed_inputs", seed_inputs},
      {"k", spec.k},
      {"n_start", spec.n_start},
      {"n_max", spec.n_max},
      {"aggregation", aggregation_name(spec.aggregation)},
      {"final_n", result.final_n},
      {"n_topics", result.model ? result.model->n_topics() : 0},
      {"model", {{"file", "lda.bin"}, {"sha256", model_sha256}}},
      {"attempts", attempts},
      {"topics", topics},
      {"warnings", warnings},
  };
}

json query_to_json(const TopicalQuery& q) {
  json j = {{"terms", q.terms},
            {"threshold", q.threshold},
            {"min_terms", q.min_terms},
            {"limit", q.limit ? json(*q.limit) : json()},
            {"weighting", q.weighting == QueryWeighting::Uniform ? "uniform" : "group_weight"}};
  if (q.weighting == QueryWeighting::GroupWeight) j["term_weights"] = q.term_weights;
  return j;
}

json retrieval_to_json(const RetrievalResult& result) {
  json hits = json::array();
  for (const auto& h : result.hits) hits.push_back({{"id", h.id}, {"score", h.score}, {"doc_length", h.doc_length}});
  return {{"query", query_to_json(result.query)}, {"warnings", result.warnings}, {"hits", hits}};
}

std::vector<std::string> ranked_ids_from_json(const json& result) {
  if (!result.is_object() || !result.contains("hits") || !result.at("hits").is_array()) {
    throw Error(ErrorCode::MalformedRecord, "retrieval result has no 'hits' array");
  }
  std::vector<std::string> ids;
  for (const auto& hit : result.at("hits")) ids.push_back(hit.at("id").get<std::string>());
  return ids;
}

json evaluation_to_json(const EvaluationReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  json top_k = json::array();
  for (const auto& [k, p] : r.top_k) top_k.push_back({{"k", k}, {"precision", p}});
  return {{"matrix",
           {{"tp", r.matrix.tp}, {"fp", r.matrix.fp}, {"fn", r.matrix.fn}, {"tn", r.matrix.tn}, {"total", r.matrix.total()}}},
          {"precision", opt(r.precision)},
          {"recall", opt(r.recall)},
          {"f1", opt(r.f1)},
          {"informational", {"recall", "f1"}},
          {"top_k", top_k}};
}

json document_to_json(const Document& doc) {
  return {{"id", doc.id},
          {"date", doc.date ? json(format_iso_date(*doc.date)) : json()},
          {"text", doc.raw_text},
          {"token_count", doc.tokens.size()}};
}

json error_to_json(const Error& error) {
  return {{"error", {{"code", error.code_name()}, {"message", error.what()}}}};
}

}  // namespace topicnav::json_io
