#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opinionlens {

enum class ErrorCode {
  kMalformedRecord,
  kDuplicateId,
  kEmptyText,
  kCorpusTooSmall,
  kInvalidSpec,
  kMissingVector,
  kDimensionMismatch,
  kMalformedRow,
  kBadDims,
  kBadLabel,
  kDegenerateLabels,
  kIoError,
  kFormatError,
  kVersionMismatch,
  kChecksumMismatch,
  kEmbedderMismatch,
  kBadOverrideIndex,
  kLengthMismatch,
  kEmpty,
  kDegenerateRanks,
  kPoolExhausted,
};

// Stable snake_case identifier, used in JSON error bodies and CLI diagnostics.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace opinionlens
