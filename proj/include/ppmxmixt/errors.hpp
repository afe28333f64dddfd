#pragma once

#include <stdexcept>
#include <string>

namespace ppmxmixt {

// Bad inputs: malformed configs, inconsistent data, invalid partitions.
// CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyBlock : ValidationError {
  explicit EmptyBlock(const std::string& msg) : ValidationError(msg) {}
};

struct NonContiguousLabels : ValidationError {
  explicit NonContiguousLabels(const std::string& msg) : ValidationError(msg) {}
};

struct SizeMismatch : ValidationError {
  explicit SizeMismatch(const std::string& msg) : ValidationError(msg) {}
};

struct DegenerateCovariates : ValidationError {
  explicit DegenerateCovariates(const std::string& msg) : ValidationError(msg) {}
};

struct DimensionMismatch : ValidationError {
  explicit DimensionMismatch(const std::string& msg) : ValidationError(msg) {}
};

struct EmptySet : ValidationError {
  explicit EmptySet(const std::string& msg) : ValidationError(msg) {}
};

// File/Config syntax problems; messages carry the row/column or key.
struct ParseError : ValidationError {
  explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

struct NonBinaryValue : ValidationError {
  explicit NonBinaryValue(const std::string& msg) : ValidationError(msg) {}
};

struct NonMonotoneOccasions : ValidationError {
  explicit NonMonotoneOccasions(const std::string& msg)
      : ValidationError(msg) {}
};

struct CensorBeforeLastEvent : ValidationError {
  explicit CensorBeforeLastEvent(const std::string& msg)
      : ValidationError(msg) {}
};

// Inconsistent synthetic-data generator request.
struct SpecError : ValidationError {
  explicit SpecError(const std::string& msg) : ValidationError(msg) {}
};

// Runtime numerical failures (non-finite weights, failed decompositions).
// CLI maps these to exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonConvergence : NumericalError {
  explicit NonConvergence(const std::string& msg) : NumericalError(msg) {}
};

struct QuadratureFailure : NumericalError {
  explicit QuadratureFailure(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace ppmxmixt
