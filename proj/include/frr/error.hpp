#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frr {

enum class ErrorCode {
  EmptyMatrix,
  NonFinite,
  UnknownKind,
  RankTooLarge,
  ZeroMatrix,
  NegativeTau,
  SingularSystem,
  ShapeMismatch,
  NotSquare,
  KTooLarge,
  EmptyGraph,
  LengthMismatch,
  InvalidSpec,
  InvalidCount,
  InvalidConfig,
  EmptyGallery,
  IoError,
  BadMagic,
  BadVersion,
  TruncatedFile,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NegativeTau: return "NegativeTau";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyGallery: return "EmptyGallery";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace frr
