#include "opinionlens/error.hpp"

namespace opinionlens {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "malformed_record";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kEmptyText: return "empty_text";
    case ErrorCode::kCorpusTooSmall: return "corpus_too_small";
    case ErrorCode::kInvalidSpec: return "invalid_spec";
    case ErrorCode::kMissingVector: return "missing_vector";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kMalformedRow: return "malformed_row";
    case ErrorCode::kBadDims: return "bad_dims";
    case ErrorCode::kBadLabel: return "bad_label";
    case ErrorCode::kDegenerateLabels: return "degenerate_labels";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kFormatError: return "format_error";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kChecksumMismatch: return "checksum_mismatch";
    case ErrorCode::kEmbedderMismatch: return "embedder_mismatch";
    case ErrorCode::kBadOverrideIndex: return "bad_override_index";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kEmpty: return "empty";
    case ErrorCode::kDegenerateRanks: return "degenerate_ranks";
    case ErrorCode::kPoolExhausted: return "pool_exhausted";
  }
  return "unknown";
}

}  // namespace opinionlens
