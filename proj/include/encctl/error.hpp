// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace encctl {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  IoError,
  NonFiniteSignal,
  QuantizationOverflow,
  DegenerateController,
  PlaintextOutOfRange,
  BackendMismatch,
  CapabilityExceeded,
  DepthExceeded,
  NoObservableDynamics,
  PatternViolation,
  ExpansionBudgetExceeded,
  HistoryNotDerivable,
  PlaintextOverflow,
  SignalBoundViolated,
  StaleCiphertext,
  PlantDiverged,
  ExactnessViolated,
  CertificationFailed,
  LengthMismatch,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NonFiniteSignal: return "NonFiniteSignal";
    case ErrorCode::QuantizationOverflow: return "QuantizationOverflow";
    case ErrorCode::DegenerateController: return "DegenerateController";
    case ErrorCode::PlaintextOutOfRange: return "PlaintextOutOfRange";
    case ErrorCode::BackendMismatch: return "BackendMismatch";
    case ErrorCode::CapabilityExceeded: return "CapabilityExceeded";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::NoObservableDynamics: return "NoObservableDynamics";
    case ErrorCode::PatternViolation: return "PatternViolation";
    case ErrorCode::ExpansionBudgetExceeded: return "ExpansionBudgetExceeded";
    case ErrorCode::HistoryNotDerivable: return "HistoryNotDerivable";
    case ErrorCode::PlaintextOverflow: return "PlaintextOverflow";
    case ErrorCode::SignalBoundViolated: return "SignalBoundViolated";
    case ErrorCode::StaleCiphertext: return "StaleCiphertext";
    case ErrorCode::PlantDiverged: return "PlantDiverged";
    case ErrorCode::ExactnessViolated: return "ExactnessViolated";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code and, for errors raised inside a
/// control loop, the step index at which they occurred.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::uint64_t> step() const noexcept { return step_; }

  /// Copy of this error tagged with a step index (first tag wins).
  Error at_step(std::uint64_t t) const {
    if (step_) return *this;
    Error e(code_, detail_ + " (at step " + std::to_string(t) + ")");
    e.step_ = t;
    return e;
  }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::uint64_t> step_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace encctl
