#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qfals {

enum class ErrorKind {
  DimensionMismatch,
  NonFinite,
  NotHermitian,
  NotPsd,
  NotEffect,
  NotTraceNonIncreasing,
  NotTracePreserving,
  SystemMismatch,
  NotIsometry,
  NotRank1,
  NotMaxEntangled,
  RankExceedsEnvironment,
  NoEffectiveFalsifier,
  NoAnalyticForm,
  SumNotIdentity,
  SpanConstruction,
  InvalidArgument,
  // circuit language
  Syntax,
  UnknownKeyword,
  DuplicateIdentifier,
  UnknownIdentifier,
  WireMismatch,
  DanglingSystem,
  BadOutcome,
  // I/O
  FileIo,
  BadJson,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a category so that front ends
/// can map it to a stable exit code or diagnostic label.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace qfals
