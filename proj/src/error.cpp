#include "qfals/error.hpp"

namespace qfals {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::NotHermitian: return "not-hermitian";
    case ErrorKind::NotPsd: return "not-psd";
    case ErrorKind::NotEffect: return "not-effect";
    case ErrorKind::NotTraceNonIncreasing: return "not-trace-non-increasing";
    case ErrorKind::NotTracePreserving: return "not-trace-preserving";
    case ErrorKind::SystemMismatch: return "system-mismatch";
    case ErrorKind::NotIsometry: return "not-an-isometry";
    case ErrorKind::NotRank1: return "not-rank-1";
    case ErrorKind::NotMaxEntangled: return "not-max-entangled";
    case ErrorKind::RankExceedsEnvironment: return "rank-exceeds-environment";
    case ErrorKind::NoEffectiveFalsifier: return "no-effective-falsifier";
    case ErrorKind::NoAnalyticForm: return "no-analytic-form";
    case ErrorKind::SumNotIdentity: return "sum-not-identity";
    case ErrorKind::SpanConstruction: return "span-construction-failure";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Syntax: return "syntax-error";
    case ErrorKind::UnknownKeyword: return "unknown-keyword";
    case ErrorKind::DuplicateIdentifier: return "duplicate-identifier";
    case ErrorKind::UnknownIdentifier: return "unknown-identifier";
    case ErrorKind::WireMismatch: return "wire-mismatch";
    case ErrorKind::DanglingSystem: return "dangling-system";
    case ErrorKind::BadOutcome: return "bad-outcome";
    case ErrorKind::FileIo: return "file-io";
    case ErrorKind::BadJson: return "bad-json";
  }
  return "unknown";
}

}  // namespace qfals
