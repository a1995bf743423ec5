#pragma once

#include <stdexcept>
#include <string>

namespace tssc {

// Error taxonomy. std::domain_error is thrown directly for value-level
// precondition violations; the types below cover the remaining failure
// classes so callers can discriminate without string matching.

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad magic or unsupported version in a serialized artifact.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid header but truncated or inconsistent payload.
struct CorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tssc
