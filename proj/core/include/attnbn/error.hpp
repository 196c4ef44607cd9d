#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attnbn {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kDivergence,
  kUnsupportedVariant,
  kVersionMismatch,
  kTruncated,
  kChecksum,
  kScenarioGeneration,
  kNonFinite,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by dataset and checkpoint readers when a record's CRC32 does not match.
class ChecksumError : public Error {
 public:
  ChecksumError(std::size_t record_index, const std::string& message);

  std::size_t record_index() const noexcept { return record_index_; }

 private:
  std::size_t record_index_;
};

[[noreturn]] void throw_invalid(const std::string& message);

}  // namespace attnbn
