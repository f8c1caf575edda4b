// Batch driver: one subcommand per pipeline stage.
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "topicnav/error.hpp"
#include "topicnav/serialize.hpp"
#include "topicnav/service.hpp"
#include "topicnav/store.hpp"
#include "topicnav/workflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace topicnav;

namespace {

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Engine: return 3;
    case ErrorCategory::Io: return 4;
  }
  return 3;
}

void emit(const json& j) { std::cout << json_io::to_text(j) << std::flush; }

struct LdaFlags {
  std::optional<double> alpha, beta;
  std::optional<std::size_t> iterations, burn_in, lag;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--alpha", alpha, "Dirichlet prior on document-topic mixtures (default 50/M)");
    app->add_option("--beta", beta, "Dirichlet prior on topic-word distributions (default 0.01)");
    app->add_option("--iters", iterations, "Gibbs sweeps (default 1000)");
    app->add_option("--burn-in", burn_in, "sweeps discarded before averaging (default 500)");
    app->add_option("--lag", lag, "sweeps between averaged samples (default 50)");
    app->add_option("--seed", seed, "random seed (default 1)");
  }

  workflow::LdaOverrides overrides() const {
    workflow::LdaOverrides o;
    o.alpha = alpha;
    o.beta = beta;
    o.iterations = iterations;
    o.burn_in = burn_in;
    o.sample_lag = lag;
    o.seed = seed;
    return o;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void print_hits(const json& result) {
  for (const auto& w : result.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
  std::size_t rank = 0;
  for (const auto& hit : result.at("hits")) {
    std::printf("%4zu  %.4f  %5d  %s\n", ++rank, hit.at("score").get<double>(), hit.at("doc_length").get<int>(),
                hit.at("id").get<std::string>().c_str());
  }
  if (rank == 0) std::printf("no documents above threshold\n");
}

void print_topics(const json& topics) {
  std::printf("final n = %zu (%zu LDA topics)\n", topics.at("final_n").get<std::size_t>(),
              topics.at("n_topics").get<std::size_t>());
  for (const auto& t : topics.at("topics")) {
    std::printf("%s:", t.at("seed").get<std::string>().c_str());
    for (const auto& s : t.at("signature")) std::printf(" %s", s.at("term").get<std::string>().c_str());
    std::printf("\n");
  }
  for (const auto& w : topics.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
}

void print_eval(const json& report) {
  const auto& m = report.at("matrix");
  std::printf("tp %lld  fp %lld  fn %lld  tn %lld\n", m.at("tp").get<long long>(), m.at("fp").get<long long>(),
              m.at("fn").get<long long>(), m.at("tn").get<long long>());
  auto show = [&](const char* name) {
    const auto& v = report.at(name);
    if (v.is_null()) {
      std::printf("%s undefined\n", name);
    } else {
      std::printf("%s %.4f\n", name, v.get<double>());
    }
  };
  show("precision");
  show("recall");
  show("f1");
  for (const auto& p : report.at("top_k")) {
    std::printf("precision@%zu %.4f\n", p.at("k").get<std::size_t>(), p.at("precision").get<double>());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic navigation over noisy text corpora"};
  app.require_subcommand(1);
  bool as_json = false;

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "load, normalize and tokenize a corpus");
  fs::path corpus, out, stopwords, lexicon, stemmer;
  std::string format = "jsonl";
  std::size_t min_token_len = 2;
  bool strip_diacritics = false;
  unsigned threads = 0;
  ingest_cmd->add_option("--corpus", corpus, "JSONL file or directory of .txt files")->required();
  ingest_cmd->add_option("--format", format, "jsonl | dir")->check(CLI::IsMember({"jsonl", "dir"}));
  ingest_cmd->add_option("--stopwords", stopwords, "stopword list, one per line");
  ingest_cmd->add_option("--lexicon", lexicon, "variant<TAB>canonical table");
  ingest_cmd->add_option("--stemmer", stemmer, "suffix<TAB>replacement rules");
  ingest_cmd->add_option("--min-token-len", min_token_len);
  ingest_cmd->add_flag("--strip-diacritics", strip_diacritics);
  ingest_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
  ingest_cmd->add_option("--out", out, "experiment directory")->required();
  ingest_cmd->add_flag("--json", as_json);

  // index
  fs::path exp;
  auto* index_cmd = app.add_subcommand("index", "build the vocabulary and TF-IDF index");
  workflow::IndexRequest index_req;
  index_cmd->add_option("--exp", exp)->required();
  index_cmd->add_option("--min-df", index_req.min_df);
  index_cmd->add_option("--max-df-ratio", index_req.max_df_ratio);
  index_cmd->add_flag("--json", as_json);

  // lda
  auto* lda_cmd = app.add_subcommand("lda", "fit an over-fragmented LDA model with n*N topics");
  workflow::LdaRequest lda_req;
  LdaFlags lda_flags;
  lda_cmd->add_option("--exp", exp)->required();
  lda_cmd->add_option("--n-topics-of-interest,-N", lda_req.topics_of_interest)->required();
  lda_cmd->add_option("--fragment,-n", lda_req.fragment);
  lda_flags.add(lda_cmd);
  lda_cmd->add_flag("--json", as_json);

  // induce
  auto* induce_cmd = app.add_subcommand("induce", "derive one signature per seed term");
  workflow::InduceRequest induce_req;
  std::string seeds, aggregation = "sum";
  LdaFlags induce_flags;
  induce_cmd->add_option("--exp", exp)->required();
  induce_cmd->add_option("--seeds", seeds, "comma separated seed terms")->required();
  induce_cmd->add_option("--k", induce_req.k, "signature size");
  induce_cmd->add_option("--n-start", induce_req.n_start);
  induce_cmd->add_option("--n-max", induce_req.n_max);
  induce_cmd->add_option("--seed-floor", induce_req.seed_floor);
  induce_cmd->add_option("--aggregation", aggregation)->check(CLI::IsMember({"sum", "max"}));
  induce_flags.add(induce_cmd);
  induce_cmd->add_flag("--json", as_json);

  // query
  auto* query_cmd = app.add_subcommand("query", "rank documents against a topic or a term list");
  workflow::QueryRequest query_req;
  std::string terms, topic, weighting = "uniform";
  query_cmd->add_option("--exp", exp)->required();
  auto* topic_opt = query_cmd->add_option("--topic", topic, "seed of an induced topic");
  auto* terms_opt = query_cmd->add_option("--terms", terms, "comma separated terms");
  topic_opt->excludes(terms_opt);
  query_cmd->add_option("--threshold", query_req.threshold);
  query_cmd->add_option("--min-terms", query_req.min_terms);
  query_cmd->add_option("--limit", query_req.limit);
  query_cmd->add_option("--weighting", weighting)->check(CLI::IsMember({"uniform", "group_weight"}));
  query_cmd->add_flag("--json", as_json);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a ranked result against ground truth");
  workflow::EvalRequest eval_req;
  eval_cmd->add_option("--exp", exp)->required();
  eval_cmd->add_option("--truth", eval_req.truth, "relevant ids, one per line")->required();
  eval_cmd->add_option("--predictions", eval_req.predictions, "query --json output")->required();
  eval_cmd->add_option("--top-k", eval_req.top_k);
  eval_cmd->add_option("--name", eval_req.name, "report name under eval/");
  eval_cmd->add_flag("--json", as_json);

  // doc
  auto* doc_cmd = app.add_subcommand("doc", "print a document's raw text");
  std::string doc_id;
  doc_cmd->add_option("--exp", exp)->required();
  doc_cmd->add_option("--id", doc_id)->required();
  doc_cmd->add_flag("--json", as_json);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "check artifact hashes and dependencies");
  verify_cmd->add_option("--exp", exp)->required();
  verify_cmd->add_flag("--json", as_json);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  fs::path exp_root;
  std::string listen;
  unsigned job_threads = 1;
  if (const char* env = std::getenv("TOPICNAV_EXP_ROOT")) exp_root = env;
  listen = std::getenv("TOPICNAV_LISTEN") ? std::getenv("TOPICNAV_LISTEN") : "127.0.0.1:8080";
  if (const char* env = std::getenv("TOPICNAV_JOB_THREADS")) job_threads = static_cast<unsigned>(std::atoi(env));
  serve_cmd->add_option("--exp-root", exp_root, "directory holding experiments");
  serve_cmd->add_option("--listen", listen, "host:port");
  serve_cmd->add_option("--job-threads", job_threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ingest_cmd) {
      workflow::IngestRequest req;
      req.corpus_path = corpus;
      req.format = parse_corpus_format(format);
      if (!stopwords.empty()) req.pipeline.stopwords = load_stopwords(stopwords);
      if (!stemmer.empty()) req.pipeline.stemmer_rules = load_stem_rules(stemmer);
      if (!lexicon.empty()) req.lexicon = LexiconTable::load(lexicon);
      req.pipeline.min_token_len = min_token_len;
      req.pipeline.strip_diacritics = strip_diacritics;
      req.threads = threads;
      const json summary = workflow::ingest(out, req);
      if (as_json) {
        emit(summary);
      } else {
        std::printf("%zu documents, %zu tokens\n", summary.at("documents").get<std::size_t>(),
                    summary.at("tokens").get<std::size_t>());
      }
    } else if (*index_cmd) {
      const json summary = workflow::build_index(exp, index_req);
      if (as_json) {
        emit(summary);
      } else {
        std::printf("%zu terms, %zu documents\n", summary.at("vocabulary_size").get<std::size_t>(),
                    summary.at("n_docs").get<std::size_t>());
      }
    } else if (*lda_cmd) {
      lda_req.overrides = lda_flags.overrides();
      const json summary = workflow::fit_lda(exp, lda_req);
      if (as_json) {
        emit(summary);
      } else {
        std::printf("fitted %zu topics\n", summary.at("n_topics").get<std::size_t>());
      }
    } else if (*induce_cmd) {
      induce_req.seeds = split_list(seeds);
      induce_req.aggregation = json_io::parse_aggregation(aggregation);
      induce_req.overrides = induce_flags.overrides();
      const json topics = workflow::induce(exp, induce_req);
      if (as_json) {
        emit(topics);
      } else {
        print_topics(topics);
      }
    } else if (*query_cmd) {
      if (!topic.empty()) query_req.topic = topic;
      query_req.terms = split_list(terms);
      query_req.group_weighted = weighting == "group_weight";
      const json result = workflow::query(exp, query_req);
      if (as_json) {
        emit(result);
      } else {
        print_hits(result);
      }
    } else if (*eval_cmd) {
      const json report = workflow::evaluate(exp, eval_req);
      if (as_json) {
        emit(report);
      } else {
        print_eval(report);
      }
    } else if (*doc_cmd) {
      auto snapshot = workflow::Snapshot::load(exp);
      const json doc = workflow::document(*snapshot, doc_id);
      if (as_json) {
        emit(doc);
      } else {
        std::cout << doc.at("text").get<std::string>() << "\n";
      }
    } else if (*verify_cmd) {
      const auto report = ExperimentDir::verify(exp);
      json j = {{"ok", report.ok()}, {"manifest_problem", report.manifest_problem}, {"artifacts", json::array()}};
      for (const auto& a : report.artifacts) {
        j["artifacts"].push_back({{"key", a.key}, {"file", a.file}, {"ok", a.ok}, {"problem", a.problem}});
      }
      if (as_json) {
        emit(j);
      } else {
        if (!report.manifest_ok) std::printf("manifest: %s\n", report.manifest_problem.c_str());
        for (const auto& a : report.artifacts) {
          std::printf("%-8s %-16s %s\n", a.key.c_str(), a.file.c_str(), a.ok ? "ok" : a.problem.c_str());
        }
      }
      return report.ok() ? 0 : 4;
    } else if (*serve_cmd) {
      if (exp_root.empty()) throw Error(ErrorCode::InvalidArgument, "--exp-root (or TOPICNAV_EXP_ROOT) is required");
      const auto [host, port] = parse_listen_address(listen);
      Service service({exp_root, job_threads});
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!service.listen(host, port)) throw Error(ErrorCode::Io, "cannot listen on " + listen);
    }
  } catch (const Error& e) {
    std::cerr << e.code_name() << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "IO_ERROR: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
