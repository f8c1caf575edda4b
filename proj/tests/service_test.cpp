#include <doctest.h>

#include <chrono>
#include <thread>

#include <httplib.h>

#include "support.hpp"
#include "topicnav/serialize.hpp"
#include "topicnav/service.hpp"
#include "topicnav/workflow.hpp"

using namespace topicnav;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Server {
 public:
  explicit Server(const fs::path& root) : service_({root, 1}) {
    port_ = service_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { service_.listen_after_bind(); });
    service_.wait_until_ready();
  }
  ~Server() {
    service_.stop();
    thread_.join();
  }
  int port() const { return port_; }

 private:
  Service service_;
  int port_ = 0;
  std::thread thread_;
};

struct Reply {
  int status = 0;
  std::string body;
  json j;
};

Reply post(httplib::Client& c, const std::string& path, const json& body) {
  auto res = c.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  return {res->status, res->body, json::parse(res->body)};
}

Reply get(httplib::Client& c, const std::string& path) {
  auto res = c.Get(path);
  REQUIRE(res);
  return {res->status, res->body, json::parse(res->body)};
}

json wait_for_job(httplib::Client& c, const std::string& id, std::vector<std::string>* states = nullptr) {
  for (int i = 0; i < 6000; ++i) {
    const auto r = get(c, "/jobs/" + id);
    REQUIRE(r.status == 200);
    const auto state = r.j.at("state").get<std::string>();
    if (states && (states->empty() || states->back() != state)) states->push_back(state);
    if (state == "done" || state == "failed") return r.j;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  FAIL("job did not finish");
  return {};
}

json inline_documents(const testing::PlantedCorpus& corpus) {
  json docs = json::array();
  for (const auto& d : corpus.docs) docs.push_back({{"id", d.id}, {"text", d.raw_text}});
  return docs;
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("listen address parsing") {
  CHECK(parse_listen_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(parse_listen_address(":9000").first == "0.0.0.0");
  CHECK_THROWS(parse_listen_address("localhost"));
  CHECK_THROWS(parse_listen_address("h:99999"));
}

TEST_CASE("experiment lifecycle over http") {
  testing::TempDir tmp;
  Server server(tmp.path());
  httplib::Client c("127.0.0.1", server.port());
  c.set_read_timeout(120, 0);

  testing::PlantedOptions opt;
  opt.n_docs = 150;
  opt.n_topics = 3;
  opt.words_per_topic = 15;
  const auto corpus = testing::planted_corpus(opt);

  // experiment with a corpus but no index yet
  {
    workflow::IngestRequest ingest;
    ingest.documents = corpus.docs;
    workflow::ingest(tmp / "early", ingest);
  }
  auto r = post(c, "/experiments/early/query", {{"terms", {corpus.topic_words[0][0]}}, {"threshold", 0.5}});
  CHECK(r.status == 409);
  CHECK(r.j.at("error").at("code") == "INDEX_NOT_READY");

  r = post(c, "/experiments/ghost/query", {{"terms", {"a"}}, {"threshold", 0.5}});
  CHECK(r.status == 404);
  r = post(c, "/experiments/early/query", {{"terms", {"a"}}, {"threshold", 1.5}});
  CHECK(r.status == 400);
  CHECK(r.j.at("error").at("code") == "INVALID_ARGUMENT");
  auto bad = c.Post("/experiments/early/query", "{nope", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  r = post(c, "/experiments", {{"id", "demo"}, {"documents", inline_documents(corpus)}, {"max_df_ratio", 0.9}});
  REQUIRE(r.status == 202);
  CHECK(r.j.at("experiment") == "demo");
  CHECK(r.j.at("job").at("kind") == "ingest");
  std::vector<std::string> states;
  auto job = wait_for_job(c, r.j.at("job").at("id"), &states);
  REQUIRE(job.at("state") == "done");
  CHECK(job.at("progress") == 1.0);
  CHECK(job.at("error").is_null());
  // states only move forward
  const std::vector<std::string> order{"queued", "running", "done"};
  std::size_t pos = 0;
  for (const auto& s : states) {
    auto it = std::find(order.begin() + static_cast<std::ptrdiff_t>(pos), order.end(), s);
    REQUIRE(it != order.end());
    pos = static_cast<std::size_t>(it - order.begin());
  }

  r = get(c, "/experiments/demo");
  CHECK(r.status == 200);
  CHECK(r.j.at("index_ready") == true);
  r = get(c, "/experiments");
  CHECK(r.j.at("experiments").size() == 2);

  r = post(c, "/experiments/demo/query", {{"terms", {corpus.topic_words[0][0], corpus.topic_words[0][1]}}, {"threshold", 0.82}});
  CHECK(r.status == 200);
  CHECK(r.j.at("hits").is_array());
  workflow::QueryRequest q;
  q.terms = {corpus.topic_words[0][0], corpus.topic_words[0][1]};
  q.threshold = 0.82;
  CHECK(r.body == json_io::to_text(workflow::query(tmp / "demo", q)));

  r = post(c, "/experiments/demo/topics", {{"seeds", {"nosuchseed"}}, {"n_max", 2}, {"iterations", 20}, {"burn_in", 10}});
  CHECK(r.status == 422);
  CHECK(r.j.at("error").at("code") == "SEED_NEVER_COVERED");

  // a long LDA job blocks a second exclusive build
  r = post(c, "/experiments/demo/lda", {{"N", 3}, {"n", 2}, {"iterations", 3000}, {"burn_in", 100}});
  REQUIRE(r.status == 202);
  const auto lda_job = r.j.at("job").at("id").get<std::string>();
  auto conflict = post(c, "/experiments/demo/lda", {{"N", 3}, {"n", 2}});
  CHECK(conflict.status == 409);
  CHECK(conflict.j.at("error").at("code") == "BUILD_IN_PROGRESS");
  // queries keep being served from the published index meanwhile
  r = post(c, "/experiments/demo/query", {{"terms", {corpus.topic_words[0][0]}}, {"threshold", 0.1}});
  CHECK(r.status == 200);
  job = wait_for_job(c, lda_job);
  CHECK(job.at("state") == "done");
  CHECK(job.at("result").at("n_topics") == 6);

  json seeds = json::array();
  for (std::size_t t = 0; t < 3; ++t) seeds.push_back(corpus.topic_words[t][0]);
  r = post(c, "/experiments/demo/topics",
           {{"seeds", seeds}, {"n_start", 2}, {"n_max", 3}, {"iterations", 120}, {"burn_in", 60}, {"sample_lag", 20}});
  REQUIRE(r.status == 200);
  CHECK(r.j.at("k") == 10);
  CHECK(r.j.at("topics").size() == 3);
  const auto stored = get(c, "/experiments/demo/topics");
  CHECK(stored.status == 200);
  CHECK(stored.body == r.body);

  r = post(c, "/experiments/demo/query", {{"topic_ref", corpus.topic_words[2][0]}, {"threshold", 0.1}, {"limit", 5}});
  REQUIRE(r.status == 200);
  CHECK(r.j.at("hits").size() == 5);
  const auto first = r.j.at("hits")[0].at("id").get<std::string>();

  r = get(c, "/experiments/demo/documents/" + first);
  CHECK(r.status == 200);
  CHECK(r.j.at("id") == first);
  CHECK(r.j.at("token_count").get<int>() > 0);
  r = get(c, "/experiments/demo/documents/nope");
  CHECK(r.status == 404);
  r = get(c, "/jobs/job-999");
  CHECK(r.status == 404);
  r = get(c, "/nothing/here");
  CHECK(r.status == 404);
  CHECK(r.j.at("error").at("code") == "NOT_FOUND");
}

}  // TEST_SUITE
