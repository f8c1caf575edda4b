#include "topicnav/error.hpp"

namespace topicnav {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::MalformedRecord: return "MALFORMED_RECORD";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::EmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::InvalidLexicon: return "INVALID_LEXICON";
    case ErrorCode::AllTermsUnknown: return "ALL_TERMS_UNKNOWN";
    case ErrorCode::SeedNeverCovered: return "SEED_NEVER_COVERED";
    case ErrorCode::UndefinedMetric: return "UNDEFINED_METRIC";
    case ErrorCode::IdOutsideCorpus: return "ID_OUTSIDE_CORPUS";
    case ErrorCode::IndexNotReady: return "INDEX_NOT_READY";
    case ErrorCode::BuildInProgress: return "BUILD_IN_PROGRESS";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::HashMismatch: return "HASH_MISMATCH";
    case ErrorCode::VersionMismatch: return "VERSION_MISMATCH";
    case ErrorCode::MissingDependency: return "MISSING_DEPENDENCY";
    case ErrorCode::MissingManifest: return "MISSING_MANIFEST";
    case ErrorCode::Locked: return "LOCKED";
    case ErrorCode::Io: return "IO_ERROR";
  }
  return "UNKNOWN";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedRecord:
    case ErrorCode::DuplicateId:
    case ErrorCode::InvalidLexicon:
    case ErrorCode::OutOfRange:
    case ErrorCode::IdOutsideCorpus:
      return ErrorCategory::Validation;
    case ErrorCode::Io:
    case ErrorCode::MissingManifest:
    case ErrorCode::HashMismatch:
    case ErrorCode::VersionMismatch:
    case ErrorCode::Locked:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Engine;
  }
}

}  // namespace topicnav
