#include "attnbn/error.hpp"

namespace attnbn {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kUnsupportedVariant: return "unsupported-variant";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kChecksum: return "checksum";
    case ErrorCode::kScenarioGeneration: return "scenario-generation";
    case ErrorCode::kNonFinite: return "non-finite";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ChecksumError::ChecksumError(std::size_t record_index, const std::string& message)
    : Error(ErrorCode::kChecksum, message + " (record " + std::to_string(record_index) + ")"),
      record_index_(record_index) {}

void throw_invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

}  // namespace attnbn
