#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace harmonic {

enum class ErrorKind {
  // parse family
  SyntaxError,
  NestedConj,
  NonlinearDivision,
  SchemaError,
  // representation
  RepresentationMismatch,
  // preconditions
  InvalidArgument,
  NonFinite,
  NotNormalized,
  NotInvertible,
  DegenerateMatrix,
  IdentityTransform,
  NotFixedAtZero,
  MultiplierOutOfRange,
  NotSuperattracting,
  OutOfDisk,
  SymbolNotSelfMap,
  TruncationMismatch,
  // numerical failures
  RootFindingFailed,
  PowerIterationStalled,
};

constexpr std::string_view to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::NestedConj: return "NestedConj";
    case ErrorKind::NonlinearDivision: return "NonlinearDivision";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::RepresentationMismatch: return "RepresentationMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::IdentityTransform: return "IdentityTransform";
    case ErrorKind::NotFixedAtZero: return "NotFixedAtZero";
    case ErrorKind::MultiplierOutOfRange: return "MultiplierOutOfRange";
    case ErrorKind::NotSuperattracting: return "NotSuperattracting";
    case ErrorKind::OutOfDisk: return "OutOfDisk";
    case ErrorKind::SymbolNotSelfMap: return "SymbolNotSelfMap";
    case ErrorKind::TruncationMismatch: return "TruncationMismatch";
    case ErrorKind::RootFindingFailed: return "RootFindingFailed";
    case ErrorKind::PowerIterationStalled: return "PowerIterationStalled";
  }
  return "Unknown";
}

/// Process exit code for a failure of kind `k`:
/// 2 parse, 3 representation, 4 precondition, 5 numerical.
constexpr int exit_code(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::SyntaxError:
    case ErrorKind::NestedConj:
    case ErrorKind::NonlinearDivision:
    case ErrorKind::SchemaError:
      return 2;
    case ErrorKind::RepresentationMismatch:
      return 3;
    case ErrorKind::RootFindingFailed:
    case ErrorKind::PowerIterationStalled:
    case ErrorKind::NonFinite:
      return 5;
    default:
      return 4;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace harmonic
