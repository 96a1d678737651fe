#pragma once

#include <stdexcept>
#include <string>

namespace prefpol {

// Error taxonomy; the CLI maps these to exit codes:
//   ConfigError -> 2, DataError/TrainingError/MetricError -> 3,
//   TeacherError/NetworkError -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad magic bytes or unsupported container version.
struct VersionError : DataError {
  using DataError::DataError;
};

// File ends before the declared payload does.
struct TruncatedError : DataError {
  using DataError::DataError;
};

struct ChecksumError : DataError {
  using DataError::DataError;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TeacherError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NetworkError : TeacherError {
  using TeacherError::TeacherError;
};

}  // namespace prefpol
