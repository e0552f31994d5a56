#include "ham/errors.hpp"

namespace ham {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInternal: return "internal";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kModelRejected: return "model_rejected";
    case ErrorCode::kCoverage: return "coverage";
    case ErrorCode::kDegenerateNoise: return "degenerate_noise";
    case ErrorCode::kDomain: return "domain";
  }
  return "unknown";
}

}  // namespace ham
