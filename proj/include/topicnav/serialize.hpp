#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "topicnav/error.hpp"
#include "topicnav/evaluation.hpp"
#include "topicnav/induction.hpp"
#include "topicnav/lda.hpp"
#include "topicnav/retrieval.hpp"
#include "topicnav/text_pipeline.hpp"

// JSON shapes shared by the CLI and the HTTP service, so that both emit the
// same bytes for the same inputs.
namespace topicnav::json_io {

using nlohmann::json;

/// Canonical text form: two-space indentation and a trailing newline.
std::string to_text(const json& j);

json pipeline_config_to_json(const PipelineConfig& config, const LexiconTable& lexicon);
/// Accepts the shape produced above; missing fields keep their defaults.
std::pair<PipelineConfig, LexiconTable> pipeline_config_from_json(const json& j);

json lda_config_to_json(const LdaConfig& config);
LdaConfig lda_config_from_json(const json& j);

std::string_view aggregation_name(Aggregation aggregation);
Aggregation parse_aggregation(std::string_view name);

json coverage_to_json(const CoverageReport& report);
/// Induced-topics document: seeds, K, final n, signatures with weights,
/// coverage per attempt, model reference and warnings.
json induced_topics_to_json(const InductionResult& result, const SeedSpec& spec, const json& seed_inputs,
                            const std::string& model_sha256);

json query_to_json(const TopicalQuery& query);
json retrieval_to_json(const RetrievalResult& result);
/// Reads the `hits` array of a serialized retrieval result, in rank order.
std::vector<std::string> ranked_ids_from_json(const json& result);

json evaluation_to_json(const EvaluationReport& report);
json document_to_json(const Document& doc);
json error_to_json(const Error& error);

}  // namespace topicnav::json_io
