#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsturm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

/// Failure categories. The CLI maps each one onto a fixed exit code.
enum class ErrorCode {
  kInvalidDimension,
  kNotHermitian,
  kNotProjector,
  kBoundaryMismatch,
  kInconsistentCoefficients,
  kResolution,
  kPoleProximity,
  kContour,
  kMultiplicityInconsistency,
  kCountMismatch,
  kSdViolation,
  kGrouping,
  kIllConditioned,
  kDiagonalityViolation,
  kCoefficientConditions,
  kParse,
  kIo,
};

/// Short machine-readable tag, e.g. "SD_VIOLATION".
const char* error_tag(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Spectral norm of a small dense matrix.
double opnorm(const CMatrix& a);

/// ||A - A^dagger|| in the spectral norm.
double hermitian_defect(const CMatrix& a);

/// (A + A^dagger) / 2.
CMatrix hermitian_part(const CMatrix& a);

/// Emits a warning line on std::clog unless warnings are muted.
void log_warning(const std::string& message);
void set_warnings_muted(bool muted);

}  // namespace gsturm
