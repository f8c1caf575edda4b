#include "topicnav/service.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "topicnav/error.hpp"
#include "topicnav/serialize.hpp"
#include "topicnav/store.hpp"
#include "topicnav/workflow.hpp"

namespace topicnav {

namespace fs = std::filesystem;
using nlohmann::json;

std::pair<std::string, int> parse_listen_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    throw Error(ErrorCode::InvalidArgument, "listen address must be host:port");
  }
  std::string host = address.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad port in '" + address + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidArgument, "port out of range");
  return {host, port};
}

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexNotReady:
    case ErrorCode::BuildInProgress:
    case ErrorCode::Locked:
      return 409;
    case ErrorCode::NotFound:
    case ErrorCode::MissingManifest:
      return 404;
    case ErrorCode::SeedNeverCovered:
    case ErrorCode::AllTermsUnknown:
    case ErrorCode::UndefinedMetric:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::MissingDependency:
      return 422;
    default:
      break;
  }
  return error_category(code) == ErrorCategory::Validation ? 400 : 500;
}

bool valid_experiment_id(const std::string& id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

enum class JobState { Queued, Running, Done, Failed };

std::string_view state_name(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

struct Job {
  std::string id;
  std::string kind;  // ingest | index | lda | induce
  std::string experiment;
  JobState state = JobState::Queued;
  double progress = 0.0;
  std::optional<json> error;
  std::optional<json> result;

  json to_json() const {
    return {{"id", id},
            {"kind", kind},
            {"experiment", experiment},
            {"state", state_name(state)},
            {"progress", progress},
            {"error", error ? *error : json()},
            {"result", result ? *result : json()}};
  }
};

using ProgressFn = std::function<void(double)>;

class JobManager {
 public:
  explicit JobManager(unsigned threads) {
    for (unsigned i = 0; i < std::max(1u, threads); ++i) workers_.emplace_back([this] { run(); });
  }

  ~JobManager() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  /// Claims the experiment for an exclusive build; throws BuildInProgress.
  void claim(const std::string& experiment) {
    std::lock_guard lock(mutex_);
    if (!busy_.insert(experiment).second) {
      throw Error(ErrorCode::BuildInProgress, "a build is already running for '" + experiment + "'");
    }
  }

  void release(const std::string& experiment) {
    std::lock_guard lock(mutex_);
    busy_.erase(experiment);
  }

  bool busy(const std::string& experiment) const {
    std::lock_guard lock(mutex_);
    return busy_.contains(experiment);
  }

  json submit(const std::string& kind, const std::string& experiment, std::function<json(const ProgressFn&)> work) {
    claim(experiment);
    std::lock_guard lock(mutex_);
    Job job;
    job.id = "job-" + std::to_string(++counter_);
    job.kind = kind;
    job.experiment = experiment;
    jobs_[job.id] = job;
    queue_.push_back({job.id, std::move(work)});
    cv_.notify_one();
    return job.to_json();
  }

  std::optional<json> get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second.to_json();
  }

 private:
  struct Task {
    std::string job_id;
    std::function<json(const ProgressFn&)> work;
  };

  void run() {
    while (true) {
      Task task;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (stopping_ && queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
        jobs_[task.job_id].state = JobState::Running;
      }
      const std::string id = task.job_id;
      auto progress = [this, id](double p) {
        std::lock_guard lock(mutex_);
        jobs_[id].progress = std::clamp(p, 0.0, 1.0);
      };
      std::optional<json> result, error;
      try {
        result = task.work(progress);
      } catch (const Error& e) {
        error = json_io::error_to_json(e).at("error");
      } catch (const std::exception& e) {
        error = json{{"code", "INTERNAL"}, {"message", e.what()}};
      }
      std::lock_guard lock(mutex_);
      auto& job = jobs_[id];
      job.state = error ? JobState::Failed : JobState::Done;
      if (!error) job.progress = 1.0;
      job.result = std::move(result);
      job.error = std::move(error);
      busy_.erase(job.experiment);
    }
  }

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Task> queue_;
  std::map<std::string, Job> jobs_;
  std::set<std::string> busy_;
  std::uint64_t counter_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

template <typename T>
std::optional<T> opt_field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + name + "' has the wrong type");
  }
}

workflow::LdaOverrides overrides_from(const json& body) {
  workflow::LdaOverrides o;
  o.alpha = opt_field<double>(body, "alpha");
  o.beta = opt_field<double>(body, "beta");
  o.iterations = opt_field<std::size_t>(body, "iterations");
  o.burn_in = opt_field<std::size_t>(body, "burn_in");
  o.sample_lag = opt_field<std::size_t>(body, "sample_lag");
  o.seed = opt_field<std::uint64_t>(body, "seed");
  return o;
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceConfig c) : config(std::move(c)), jobs(config.job_threads) {
    std::error_code ec;
    fs::create_directories(config.experiments_root, ec);
    routes();
  }

  ServiceConfig config;
  httplib::Server server;
  JobManager jobs;
  std::mutex snapshot_mutex;
  std::map<std::string, std::shared_ptr<const workflow::Snapshot>> snapshots;
  std::atomic<std::uint64_t> experiment_counter{0};

  fs::path exp_path(const std::string& id) const {
    if (!valid_experiment_id(id)) throw Error(ErrorCode::InvalidArgument, "invalid experiment id '" + id + "'");
    return config.experiments_root / id;
  }

  fs::path existing_exp(const std::string& id) const {
    auto path = exp_path(id);
    if (!fs::exists(path / "manifest.json")) throw Error(ErrorCode::NotFound, "no experiment '" + id + "'");
    return path;
  }

  std::shared_ptr<const workflow::Snapshot> snapshot(const std::string& id) {
    const auto path = existing_exp(id);
    std::lock_guard lock(snapshot_mutex);
    auto it = snapshots.find(id);
    if (it != snapshots.end()) {
      if (jobs.busy(id) || it->second->manifest_digest == workflow::manifest_digest(path)) return it->second;
    } else if (jobs.busy(id)) {
      throw Error(ErrorCode::IndexNotReady, "experiment '" + id + "' is still being built");
    }
    auto snap = workflow::Snapshot::load(path);
    snapshots[id] = snap;
    return snap;
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(json_io::to_text(body), "application/json");
  }

  static json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    }
    return body;
  }

  template <typename Fn>
  auto guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        auto [status, body] = fn(req);
        reply(res, status, body);
      } catch (const Error& e) {
        reply(res, http_status(e.code()), json_io::error_to_json(e));
      } catch (const json::exception& e) {
        reply(res, 400, json_io::error_to_json(Error(ErrorCode::InvalidArgument, e.what())));
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", {{"code", "INTERNAL"}, {"message", e.what()}}}});
      }
    };
  }

  json experiment_summary(const std::string& id) {
    const auto path = existing_exp(id);
    auto dir = ExperimentDir::open(path);
    json artifacts = json::object();
    for (const auto& key : dir.keys()) {
      const auto& e = dir.entry(key);
      artifacts[key] = {{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}, {"config", e.config}};
    }
    return {{"id", id},
            {"building", jobs.busy(id)},
            {"index_ready", dir.has("index")},
            {"topics_ready", dir.has("topics")},
            {"artifacts", artifacts}};
  }

  void routes() {
    using Result = std::pair<int, json>;

    server.Get("/experiments", guarded([this](const httplib::Request&) -> Result {
      json list = json::array();
      std::vector<std::string> ids;
      std::error_code ec;
      for (const auto& entry : fs::directory_iterator(config.experiments_root, ec)) {
        const auto name = entry.path().filename().string();
        if (entry.is_directory() && valid_experiment_id(name) && fs::exists(entry.path() / "manifest.json")) {
          ids.push_back(name);
        }
      }
      std::sort(ids.begin(), ids.end());
      for (const auto& id : ids) {
        json s = experiment_summary(id);
        s.erase("artifacts");
        list.push_back(std::move(s));
      }
      return {200, {{"experiments", list}}};
    }));

    server.Post("/experiments", guarded([this](const httplib::Request& req) -> Result {
      const json body = parse_body(req);
      std::string id = opt_field<std::string>(body, "id").value_or("");
      if (id.empty()) {
        do {
          id = "exp-" + std::to_string(++experiment_counter);
        } while (fs::exists(config.experiments_root / id));
      }
      const auto path = exp_path(id);

      workflow::IngestRequest ingest;
      const json pipeline = body.value("pipeline", json::object());
      auto [pconfig, lexicon] = json_io::pipeline_config_from_json(pipeline);
      if (auto p = opt_field<std::string>(pipeline, "stopwords_path")) {
        for (const auto& w : load_stopwords(*p)) pconfig.stopwords.insert(w);
      }
      if (auto p = opt_field<std::string>(pipeline, "stemmer_path")) {
        for (auto& r : load_stem_rules(*p)) pconfig.stemmer_rules.push_back(std::move(r));
      }
      if (auto p = opt_field<std::string>(pipeline, "lexicon_path")) {
        auto entries = lexicon.entries();
        for (auto& e : LexiconTable::load(*p).entries()) entries.push_back(std::move(e));
        lexicon = LexiconTable::from_entries(std::move(entries));
      }
      ingest.pipeline = std::move(pconfig);
      ingest.lexicon = std::move(lexicon);
      ingest.format = parse_corpus_format(body.value("format", std::string("jsonl")));
      if (auto it = body.find("documents"); it != body.end() && !it->is_null()) {
        std::vector<Document> docs;
        std::set<std::string> seen;
        for (const auto& record : *it) {
          Document doc;
          doc.id = record.at("id").get<std::string>();
          doc.raw_text = record.at("text").get<std::string>();
          if (auto date = record.find("date"); date != record.end() && !date->is_null()) {
            doc.date = parse_iso_date(date->get<std::string>());
            if (!doc.date) throw Error(ErrorCode::MalformedRecord, "document '" + doc.id + "' has a bad date");
          }
          if (!seen.insert(doc.id).second) throw Error(ErrorCode::DuplicateId, "duplicate document id '" + doc.id + "'");
          docs.push_back(std::move(doc));
        }
        ingest.documents = std::move(docs);
      } else if (auto corpus = opt_field<std::string>(body, "corpus_path")) {
        ingest.corpus_path = *corpus;
      } else {
        throw Error(ErrorCode::InvalidArgument, "give 'corpus_path' or inline 'documents'");
      }
      workflow::IndexRequest index;
      index.min_df = opt_field<std::uint32_t>(body, "min_df").value_or(index.min_df);
      index.max_df_ratio = opt_field<double>(body, "max_df_ratio").value_or(index.max_df_ratio);

      json job = jobs.submit("ingest", id, [path, ingest, index](const ProgressFn& progress) {
        json summary = workflow::ingest(path, ingest);
        progress(0.5);
        summary["index"] = workflow::build_index(path, index);
        return summary;
      });
      return {202, {{"experiment", id}, {"job", job}}};
    }));

    server.Get(R"(/experiments/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req) -> Result {
      return {200, experiment_summary(req.matches[1])};
    }));

    server.Post(R"(/experiments/([A-Za-z0-9_-]+)/lda)", guarded([this](const httplib::Request& req) -> Result {
      const std::string id = req.matches[1];
      const auto path = existing_exp(id);
      const json body = parse_body(req);
      workflow::LdaRequest lda;
      lda.topics_of_interest = opt_field<std::size_t>(body, "N").value_or(0);
      lda.fragment = opt_field<std::size_t>(body, "n").value_or(2);
      lda.overrides = overrides_from(body);
      if (lda.topics_of_interest < 1) throw Error(ErrorCode::InvalidArgument, "'N' must be >= 1");
      if (!ExperimentDir::open(path).has("vocab")) {
        throw Error(ErrorCode::IndexNotReady, "build the index before fitting LDA");
      }
      json job = jobs.submit("lda", id, [path, lda](const ProgressFn& progress) {
        LdaConfig resolved;
        lda.overrides.apply(resolved);
        const double total = static_cast<double>(resolved.iterations);
        FitOptions options;
        options.on_sweep = [&](const SweepStats& s) {
          if (s.sweep % 10 == 0) progress(static_cast<double>(s.sweep) / total);
        };
        return workflow::fit_lda(path, lda, options);
      });
      return {202, {{"experiment", id}, {"job", job}}};
    }));

    server.Post(R"(/experiments/([A-Za-z0-9_-]+)/topics)", guarded([this](const httplib::Request& req) -> Result {
      const std::string id = req.matches[1];
      const auto path = existing_exp(id);
      const json body = parse_body(req);
      workflow::InduceRequest induce;
      induce.seeds = opt_field<std::vector<std::string>>(body, "seeds").value_or(std::vector<std::string>{});
      induce.k = opt_field<std::size_t>(body, "K").value_or(induce.k);
      induce.n_start = opt_field<std::size_t>(body, "n_start").value_or(induce.n_start);
      induce.n_max = opt_field<std::size_t>(body, "n_max").value_or(induce.n_max);
      induce.seed_floor = opt_field<double>(body, "seed_floor");
      if (auto agg = opt_field<std::string>(body, "aggregation")) induce.aggregation = json_io::parse_aggregation(*agg);
      induce.overrides = overrides_from(body);
      if (induce.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "'seeds' must be a non-empty array");
      if (!ExperimentDir::open(path).has("vocab")) {
        throw Error(ErrorCode::IndexNotReady, "build the index before inducing topics");
      }
      jobs.claim(id);
      try {
        json topics = workflow::induce(path, induce);
        jobs.release(id);
        return {200, topics};
      } catch (...) {
        jobs.release(id);
        throw;
      }
    }));

    server.Get(R"(/experiments/([A-Za-z0-9_-]+)/topics)", guarded([this](const httplib::Request& req) -> Result {
      auto snap = snapshot(req.matches[1]);
      if (!snap->topics) throw Error(ErrorCode::NotFound, "no induced topics have been built");
      return {200, *snap->topics};
    }));

    server.Post(R"(/experiments/([A-Za-z0-9_-]+)/query)", guarded([this](const httplib::Request& req) -> Result {
      const json body = parse_body(req);
      workflow::QueryRequest q;
      q.terms = opt_field<std::vector<std::string>>(body, "terms").value_or(std::vector<std::string>{});
      q.topic = opt_field<std::string>(body, "topic_ref");
      if (!q.topic) q.topic = opt_field<std::string>(body, "topic");
      q.threshold = opt_field<double>(body, "threshold").value_or(q.threshold);
      q.min_terms = opt_field<std::size_t>(body, "min_terms").value_or(0);
      q.limit = opt_field<std::size_t>(body, "limit");
      const auto weighting = opt_field<std::string>(body, "weighting").value_or("uniform");
      if (weighting != "uniform" && weighting != "group_weight") {
        throw Error(ErrorCode::InvalidArgument, "weighting must be 'uniform' or 'group_weight'");
      }
      q.group_weighted = weighting == "group_weight";
      q.validate();
      return {200, workflow::query(*snapshot(req.matches[1]), q)};
    }));

    server.Get(R"(/experiments/([A-Za-z0-9_-]+)/documents/(.+))", guarded([this](const httplib::Request& req) -> Result {
      return {200, workflow::document(*snapshot(req.matches[1]), req.matches[2].str())};
    }));

    server.Get(R"(/jobs/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req) -> Result {
      auto job = jobs.get(req.matches[1]);
      if (!job) throw Error(ErrorCode::NotFound, "no job '" + req.matches[1].str() + "'");
      return {200, *job};
    }));

    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        reply(res, 404, json_io::error_to_json(Error(ErrorCode::NotFound, "no such endpoint")));
      }
    });
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Service::~Service() { stop(); }

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int Service::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }
void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }
void Service::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace topicnav
