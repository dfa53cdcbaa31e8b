#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace retrogate {

enum class ErrorCode {
  // SMILES / molecule construction
  EmptyInput,
  UnbalancedBranch,
  UnclosedRingBond,
  UnknownElement,
  InvalidCharge,
  UnexpectedCharacter,
  InvalidBond,
  ValenceExceeded,
  DuplicateMapNumber,
  UnsupportedFeature,
  // fingerprints
  InvalidParams,
  WidthMismatch,
  // reactions and templates
  NoMappedAtoms,
  InvalidReaction,
  InsufficientMatches,
  // scoring
  EmptySequence,
  EmptyCenter,
  NonPositiveComponent,
  EmptyCorpus,
  DegenerateData,
  // search
  InvalidTarget,
  NoSolution,
  // evaluation
  IncompleteRoute,
  SingleClass,
  EmptyDenominator,
  // service / io
  ValidationFailed,
  NotFound,
  DuplicateId,
  ParseError,
  Io,
  Unauthorized,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::EmptyInput: return "EmptyInput";
  case ErrorCode::UnbalancedBranch: return "UnbalancedBranch";
  case ErrorCode::UnclosedRingBond: return "UnclosedRingBond";
  case ErrorCode::UnknownElement: return "UnknownElement";
  case ErrorCode::InvalidCharge: return "InvalidCharge";
  case ErrorCode::UnexpectedCharacter: return "UnexpectedCharacter";
  case ErrorCode::InvalidBond: return "InvalidBond";
  case ErrorCode::ValenceExceeded: return "ValenceExceeded";
  case ErrorCode::DuplicateMapNumber: return "DuplicateMapNumber";
  case ErrorCode::UnsupportedFeature: return "UnsupportedFeature";
  case ErrorCode::InvalidParams: return "InvalidParams";
  case ErrorCode::WidthMismatch: return "WidthMismatch";
  case ErrorCode::NoMappedAtoms: return "NoMappedAtoms";
  case ErrorCode::InvalidReaction: return "InvalidReaction";
  case ErrorCode::InsufficientMatches: return "InsufficientMatches";
  case ErrorCode::EmptySequence: return "EmptySequence";
  case ErrorCode::EmptyCenter: return "EmptyCenter";
  case ErrorCode::NonPositiveComponent: return "NonPositiveComponent";
  case ErrorCode::EmptyCorpus: return "EmptyCorpus";
  case ErrorCode::DegenerateData: return "DegenerateData";
  case ErrorCode::InvalidTarget: return "InvalidTarget";
  case ErrorCode::NoSolution: return "NoSolution";
  case ErrorCode::IncompleteRoute: return "IncompleteRoute";
  case ErrorCode::SingleClass: return "SingleClass";
  case ErrorCode::EmptyDenominator: return "EmptyDenominator";
  case ErrorCode::ValidationFailed: return "ValidationFailed";
  case ErrorCode::NotFound: return "NotFound";
  case ErrorCode::DuplicateId: return "DuplicateId";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::Io: return "Io";
  case ErrorCode::Unauthorized: return "Unauthorized";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for the library. `offset` is a byte offset into the
/// text being parsed, when the failure can be located.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message,
        std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(format(code, message, offset)), code_(code),
        offset_(offset), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }
  const std::string &detail() const noexcept { return detail_; }

private:
  static std::string format(ErrorCode code, const std::string &message,
                            std::optional<std::size_t> offset) {
    std::string out(to_string(code));
    if (offset) {
      out += " at offset ";
      out += std::to_string(*offset);
    }
    if (!message.empty()) {
      out += ": ";
      out += message;
    }
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> offset_;
  std::string detail_;
};

} // namespace retrogate
