#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tglm {

/// Broad failure class; the CLI maps these onto exit codes.
enum class ErrorCategory {
  input,      ///< malformed data, shapes or files
  numerical,  ///< singular systems, degenerate statistics
};

/// Specific failure reasons. Names mirror the error vocabulary used in the docs.
enum class ErrorKind {
  shape_mismatch,
  parse_error,
  invalid_output_label,
  duplicate_output_label,
  extent_mismatch,
  operand_count_mismatch,
  extent_too_large,
  singular_matrix,
  singular_gram,
  empty_group,
  group_id_out_of_range,
  insufficient_samples,
  no_degrees_of_freedom,
  all_zero_hypothesis,
  non_positive_variance,
  singular_contrast_system,
  singular_system,
  length_mismatch,
  missing_column,
  non_numeric_cell,
  empty_file,
  index_out_of_range,
  io_failure,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::invalid_output_label: return "InvalidOutputLabel";
    case ErrorKind::duplicate_output_label: return "DuplicateOutputLabel";
    case ErrorKind::extent_mismatch: return "ExtentMismatch";
    case ErrorKind::operand_count_mismatch: return "OperandCountMismatch";
    case ErrorKind::extent_too_large: return "ExtentTooLarge";
    case ErrorKind::singular_matrix: return "SingularMatrix";
    case ErrorKind::singular_gram: return "SingularGram";
    case ErrorKind::empty_group: return "EmptyGroup";
    case ErrorKind::group_id_out_of_range: return "GroupIdOutOfRange";
    case ErrorKind::insufficient_samples: return "InsufficientSamples";
    case ErrorKind::no_degrees_of_freedom: return "NoDegreesOfFreedom";
    case ErrorKind::all_zero_hypothesis: return "AllZeroHypothesis";
    case ErrorKind::non_positive_variance: return "NonPositiveVariance";
    case ErrorKind::singular_contrast_system: return "SingularContrastSystem";
    case ErrorKind::singular_system: return "SingularSystem";
    case ErrorKind::length_mismatch: return "LengthMismatch";
    case ErrorKind::missing_column: return "MissingColumn";
    case ErrorKind::non_numeric_cell: return "NonNumericCell";
    case ErrorKind::empty_file: return "EmptyFile";
    case ErrorKind::index_out_of_range: return "IndexOutOfRange";
    case ErrorKind::io_failure: return "IoFailure";
  }
  return "Unknown";
}

inline ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::singular_matrix:
    case ErrorKind::singular_gram:
    case ErrorKind::insufficient_samples:
    case ErrorKind::no_degrees_of_freedom:
    case ErrorKind::non_positive_variance:
    case ErrorKind::singular_contrast_system:
    case ErrorKind::singular_system:
      return ErrorCategory::numerical;
    default:
      return ErrorCategory::input;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

/// Error that names the group or hypothesis it concerns.
class IndexedError : public Error {
 public:
  IndexedError(ErrorKind kind, std::size_t index, const std::string& what)
      : Error(kind, what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace tglm
