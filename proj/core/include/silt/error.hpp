#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace silt {

enum class ErrorKind {
  InvalidArgument,
  DegenerateInterval,
  DependentIncrements,
  SingularOperator,
  InvalidSpec,
  UnsupportedSpec,
  FactorizationFailure,
  NonpositiveEps,
  EmptySimplex,
  SingularGram,
  KernelIndicator,
  ConditionsViolated,
  DegenerateDifference,
  NotAKernelIndicator,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateInterval: return "DegenerateInterval";
    case ErrorKind::DependentIncrements: return "DependentIncrements";
    case ErrorKind::SingularOperator: return "SingularOperator";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::UnsupportedSpec: return "UnsupportedSpec";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::NonpositiveEps: return "NonpositiveEps";
    case ErrorKind::EmptySimplex: return "EmptySimplex";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::KernelIndicator: return "KernelIndicator";
    case ErrorKind::ConditionsViolated: return "ConditionsViolated";
    case ErrorKind::DegenerateDifference: return "DegenerateDifference";
    case ErrorKind::NotAKernelIndicator: return "NotAKernelIndicator";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace silt
