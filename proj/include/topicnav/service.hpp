#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace topicnav {

struct ServiceConfig {
  std::filesystem::path experiments_root;
  unsigned job_threads = 1;
};

/// HTTP+JSON facade. Builds (ingest+index, LDA) run as background jobs,
/// induction and retrieval answer synchronously. At most one build per
/// experiment runs at a time; queries use the last published artifacts.
///
///   GET  /experiments                           list experiments
///   POST /experiments                           ingest + index job
///   GET  /experiments/{id}                      manifest summary
///   POST /experiments/{id}/lda                  LDA job
///   POST /experiments/{id}/topics               induce topics
///   GET  /experiments/{id}/topics               stored induced topics
///   POST /experiments/{id}/query                ranked retrieval
///   GET  /experiments/{id}/documents/{doc_id}   raw text + token count
///   GET  /jobs/{id}                             job state
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Blocks serving on host:port until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; follow with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host:port" (port required).
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace topicnav
