#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace btp {

using Cx = std::complex<double>;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kCoeffDrop = 1e-14;
inline constexpr int kMaxDim = 8;

/// Failure categories surfaced by the library.  The CLI maps every thrown
/// Error to exit code 2 (bad input / violated precondition); verdict-level
/// failures are ordinary return values and map to exit code 1.
enum class ErrorCode {
  NotNormal,
  NoConvergence,
  DimensionMismatch,
  NotValidated,
  MixedBidegree,
  Balanced,
  NotBTP,
  PreconditionFailed,
  NotApplicable,
  Indeterminate,
  SingularPoint,
  ParseError,
  SchemaError,
  InvalidParameter,
  ShapeMismatch,
  ValidationFailed,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotNormal: return "NotNormal";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotValidated: return "NotValidated";
    case ErrorCode::MixedBidegree: return "MixedBidegree";
    case ErrorCode::Balanced: return "Balanced";
    case ErrorCode::NotBTP: return "NotBTP";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::Indeterminate: return "Indeterminate";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

/// Two-band verdict: a residual below tol is a pass, a residual at or above
/// 10*tol is a fail, and the band in between is surfaced instead of being
/// silently rounded to either side.
enum class Verdict { True, False, Indeterminate };

inline Verdict band_verdict(double residual, double tol) {
  if (residual < tol) return Verdict::True;
  if (residual >= 10.0 * tol) return Verdict::False;
  return Verdict::Indeterminate;
}

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct FlagResult {
  Verdict verdict = Verdict::Indeterminate;
  double residual = 0.0;
  bool is_true() const { return verdict == Verdict::True; }
};

inline bool is_true(const FlagResult& f) { return f.verdict == Verdict::True; }

}  // namespace btp
