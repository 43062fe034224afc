#pragma once

#include <stdexcept>
#include <string>

namespace bwbary {

enum class ErrorKind {
  InvalidInput,
  NotPSD,
  DimensionMismatch,
  KernelNotIncluded,
  NonFinite,
  NInsufficient,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::KernelNotIncluded: return "KernelNotIncluded";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NInsufficient: return "NInsufficient";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace bwbary
