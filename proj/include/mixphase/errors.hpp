#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mixphase {

enum class ErrorCode {
  NonStochasticWeights,
  NonOrthonormalFrame,
  DimensionMismatch,
  NonHermitianInput,
  InvalidDensity,
  NonUnitary,
  DegenerateSpectrum,
  UndefinedPhase,
  EmptyPath,
  PathTooShort,
  FrameDiscontinuity,
  NotParallelTransported,
  NodalPoint,
  OrthogonalEndpoints,
  StepTooCoarse,
  InvalidBlochVector,
  AntipodalWaypoints,
  ScenarioParse,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonStochasticWeights: return "NonStochasticWeights";
    case ErrorCode::NonOrthonormalFrame: return "NonOrthonormalFrame";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::NonUnitary: return "NonUnitary";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::UndefinedPhase: return "UndefinedPhase";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::PathTooShort: return "PathTooShort";
    case ErrorCode::FrameDiscontinuity: return "FrameDiscontinuity";
    case ErrorCode::NotParallelTransported: return "NotParallelTransported";
    case ErrorCode::NodalPoint: return "NodalPoint";
    case ErrorCode::OrthogonalEndpoints: return "OrthogonalEndpoints";
    case ErrorCode::StepTooCoarse: return "StepTooCoarse";
    case ErrorCode::InvalidBlochVector: return "InvalidBlochVector";
    case ErrorCode::AntipodalWaypoints: return "AntipodalWaypoints";
    case ErrorCode::ScenarioParse: return "ScenarioParse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Short rendering of a double for error messages.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// True for failures where the input was fine but the requested quantity
/// does not exist (degenerate frame, vanishing trace, ...).
constexpr bool is_numerical_abort(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateSpectrum:
    case ErrorCode::UndefinedPhase:
    case ErrorCode::FrameDiscontinuity:
    case ErrorCode::NotParallelTransported:
    case ErrorCode::NodalPoint:
    case ErrorCode::OrthogonalEndpoints:
    case ErrorCode::StepTooCoarse:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& context)
      : std::runtime_error(std::string(to_string(code)) + ": " + context),
        code_(code),
        context_(context) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

/// Eigenvalue groups closer than the degeneracy tolerance, as indices into
/// the descending weight list.
class DegenerateSpectrumError : public Error {
 public:
  DegenerateSpectrumError(std::vector<std::vector<std::size_t>> groups,
                          const std::string& context)
      : Error(ErrorCode::DegenerateSpectrum, context), groups_(std::move(groups)) {}

  const std::vector<std::vector<std::size_t>>& groups() const noexcept {
    return groups_;
  }

 private:
  std::vector<std::vector<std::size_t>> groups_;
};

/// Raised where |Tr[rho0 U^dagger(t)]| vanishes; carries the first offending
/// grid index and time.
class NodalPointError : public Error {
 public:
  NodalPointError(std::size_t index, double time, const std::string& context)
      : Error(ErrorCode::NodalPoint, context), index_(index), time_(time) {}

  std::size_t index() const noexcept { return index_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t index_;
  double time_;
};

}  // namespace mixphase
