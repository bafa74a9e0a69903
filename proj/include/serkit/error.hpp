#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace serkit {

enum class ErrorKind {
  EmptySignal,
  TooShort,
  BadConfig,
  TooFewFrames,
  DomainError,
  BadVariate,
  Empty,
  AbortWithDiagnostics,
  BadSplit,
  EmptyClass,
  BadInput,
  BadManifest,
  Undefined,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptySignal: return "EmptySignal";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::TooFewFrames: return "TooFewFrames";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::BadVariate: return "BadVariate";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::AbortWithDiagnostics: return "AbortWithDiagnostics";
    case ErrorKind::BadSplit: return "BadSplit";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::BadInput: return "BadInput";
    case ErrorKind::BadManifest: return "BadManifest";
    case ErrorKind::Undefined: return "Undefined";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI) can branch on the category rather than the text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace serkit
