#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pgfwass {

enum class ErrorKind {
  InvalidArgument,
  NegativeMass,
  NotNormalized,
  DomainError,
  GenerationFailed,
  UnsupportedOrder,
  EmptyVector,
  UnequalMeans,
  DegenerateDistance,
  MassLeak,
  NegativeProbability,
  MeanDrift,
  InsufficientSamples,
  MetricUnderflow,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NegativeMass: return "NegativeMass";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::EmptyVector: return "EmptyVector";
    case ErrorKind::UnequalMeans: return "UnequalMeans";
    case ErrorKind::DegenerateDistance: return "DegenerateDistance";
    case ErrorKind::MassLeak: return "MassLeak";
    case ErrorKind::NegativeProbability: return "NegativeProbability";
    case ErrorKind::MeanDrift: return "MeanDrift";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::MetricUnderflow: return "MetricUnderflow";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Library exception. Every failure raised by pgfwass carries a kind so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pgfwass
