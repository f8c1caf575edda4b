#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topicnav {

/// Machine-readable failure codes shared by the library, CLI and service.
enum class ErrorCode {
  InvalidArgument,
  MalformedRecord,
  DuplicateId,
  EmptyCorpus,
  OutOfRange,
  InvalidLexicon,
  AllTermsUnknown,
  SeedNeverCovered,
  UndefinedMetric,
  IdOutsideCorpus,
  IndexNotReady,
  BuildInProgress,
  NotFound,
  HashMismatch,
  VersionMismatch,
  MissingDependency,
  MissingManifest,
  Locked,
  Io,
};

/// Coarse grouping used for CLI exit codes and HTTP statuses.
enum class ErrorCategory { Validation, Engine, Io };

std::string_view error_code_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return error_code_name(code_); }
  ErrorCategory category() const noexcept { return error_category(code_); }

 private:
  ErrorCode code_;
};

}  // namespace topicnav
