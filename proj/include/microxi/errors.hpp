#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace microxi {

enum class ErrorKind {
  DegenerateTarget,
  OutOfRange,
  EigensolverFailure,
  AngleCollision,
  BoundaryHit,
  PathThroughZero,
  WindowTooLarge,
  WindowTooSmall,
  PointHit,
  SpectralFailure,
  RealDenominatorPoint,
  RealPoint,
  DegenerateConfiguration,
  CoincidentPair,
  NodeCollision,
  CoincidentPoints,
  CoincidentWithConjugate,
  TooManyPoints,
  DuplicatePoints,
  SupportExceedsWindow,
  DivergentIntegral,
  RealPole,
  TooFewSamples,
  InvalidSpec,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateTarget: return "DegenerateTarget";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::EigensolverFailure: return "EigensolverFailure";
    case ErrorKind::AngleCollision: return "AngleCollision";
    case ErrorKind::BoundaryHit: return "BoundaryHit";
    case ErrorKind::PathThroughZero: return "PathThroughZero";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::PointHit: return "PointHit";
    case ErrorKind::SpectralFailure: return "SpectralFailure";
    case ErrorKind::RealDenominatorPoint: return "RealDenominatorPoint";
    case ErrorKind::RealPoint: return "RealPoint";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::CoincidentPair: return "CoincidentPair";
    case ErrorKind::NodeCollision: return "NodeCollision";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::CoincidentWithConjugate: return "CoincidentWithConjugate";
    case ErrorKind::TooManyPoints: return "TooManyPoints";
    case ErrorKind::DuplicatePoints: return "DuplicatePoints";
    case ErrorKind::SupportExceedsWindow: return "SupportExceedsWindow";
    case ErrorKind::DivergentIntegral: return "DivergentIntegral";
    case ErrorKind::RealPole: return "RealPole";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every library failure is reported through this type; `kind()` tells callers
// which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace microxi
