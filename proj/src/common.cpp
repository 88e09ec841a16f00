#include "bpfree/common.hpp"

namespace bpfree {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedLevel: return "unsupported-level";
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::InvalidLayout: return "invalid-layout";
    case ErrorCode::InvalidConfig: return "config-error";
    case ErrorCode::NonFiniteLoss: return "non-finite-loss";
    case ErrorCode::ZeroReferenceNorm: return "zero-reference-norm";
    case ErrorCode::OracleNotBuilt: return "oracle-not-built";
    case ErrorCode::SolverFailure: return "solver-failure";
    case ErrorCode::OutOfDomain: return "out-of-domain";
    case ErrorCode::UnknownArchitecture: return "unknown-architecture";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::MissingRuns: return "missing-runs";
  }
  return "unknown-error";
}

}  // namespace bpfree
