#pragma once

#include <stdexcept>
#include <string>

namespace ham {

/// Process exit codes used by the command line tool; one per failure class.
enum class ErrorCode : int {
  kInternal = 1,
  kUsage = 2,
  kInvalidConfig = 3,
  kModelRejected = 4,
  kCoverage = 5,
  kDegenerateNoise = 6,
  kDomain = 7,
};

const char* error_name(ErrorCode code);

class HamError : public std::runtime_error {
 public:
  HamError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public HamError {
 public:
  explicit DomainError(const std::string& what)
      : HamError(ErrorCode::kDomain, what) {}
};

/// Levy measure that the exact solver cannot handle (e.g. nonzero drift).
class ModelRejected : public HamError {
 public:
  explicit ModelRejected(const std::string& what)
      : HamError(ErrorCode::kModelRejected, what) {}
};

/// Simulation window does not contain the backward light cone of a query.
class CoverageError : public HamError {
 public:
  explicit CoverageError(const std::string& what)
      : HamError(ErrorCode::kCoverage, what) {}
};

/// Noise with zero intensity: F is identically zero and cannot be
/// standardized.
class DegenerateNoise : public HamError {
 public:
  explicit DegenerateNoise(const std::string& what)
      : HamError(ErrorCode::kDegenerateNoise, what) {}
};

class ConfigError : public HamError {
 public:
  explicit ConfigError(const std::string& what)
      : HamError(ErrorCode::kInvalidConfig, what) {}
};

}  // namespace ham
