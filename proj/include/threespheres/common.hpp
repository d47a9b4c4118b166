#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace threespheres {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vector = VectorX<double>;
using Complex = std::complex<double>;

enum class ErrorCode {
  PreconditionViolated,
  TouchingBalls,
  ConcentricInput,
  OutOfRange,
  DegenerateLog,
  SingularPoint,
  NoRealRoot,
  NotHarmonic,
  StencilOutOfDomain,
  RuleDimensionMismatch,
  NonpositiveDensity,
  NonpositiveL,
  BetaOutOfRange,
  DeltaOutOfRange,
  ConstraintViolated,
  NonpositivePhi,
  InvalidInput,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::TouchingBalls: return "TouchingBalls";
    case ErrorCode::ConcentricInput: return "ConcentricInput";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateLog: return "DegenerateLog";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::NoRealRoot: return "NoRealRoot";
    case ErrorCode::NotHarmonic: return "NotHarmonic";
    case ErrorCode::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorCode::RuleDimensionMismatch: return "RuleDimensionMismatch";
    case ErrorCode::NonpositiveDensity: return "NonpositiveDensity";
    case ErrorCode::NonpositiveL: return "NonpositiveL";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::NonpositivePhi: return "NonpositivePhi";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// Surface area of the unit sphere S^{n-1} in R^n.
inline double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) { return unit_sphere_area(n) / n; }

}  // namespace threespheres
