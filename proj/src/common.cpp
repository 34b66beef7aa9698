#include "gsturm/common.hpp"

#include <atomic>
#include <iostream>

namespace gsturm {

namespace {
std::atomic<bool> g_warnings_muted{false};
}

const char* error_tag(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDimension: return "INVALID_DIMENSION";
    case ErrorCode::kNotHermitian: return "NOT_HERMITIAN";
    case ErrorCode::kNotProjector: return "NOT_PROJECTOR";
    case ErrorCode::kBoundaryMismatch: return "BOUNDARY_MISMATCH";
    case ErrorCode::kInconsistentCoefficients: return "INCONSISTENT_COEFFICIENTS";
    case ErrorCode::kResolution: return "RESOLUTION";
    case ErrorCode::kPoleProximity: return "POLE_PROXIMITY";
    case ErrorCode::kContour: return "CONTOUR";
    case ErrorCode::kMultiplicityInconsistency: return "MULTIPLICITY_INCONSISTENCY";
    case ErrorCode::kCountMismatch: return "COUNT_MISMATCH";
    case ErrorCode::kSdViolation: return "SD_VIOLATION";
    case ErrorCode::kGrouping: return "GROUPING";
    case ErrorCode::kIllConditioned: return "ILL_CONDITIONED";
    case ErrorCode::kDiagonalityViolation: return "DIAGONALITY_VIOLATION";
    case ErrorCode::kCoefficientConditions: return "COEFFICIENT_CONDITIONS";
    case ErrorCode::kParse: return "PARSE";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

double opnorm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double hermitian_defect(const CMatrix& a) { return opnorm(a - a.adjoint()); }

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

void log_warning(const std::string& message) {
  if (!g_warnings_muted.load()) std::clog << "warning: " << message << '\n';
}

void set_warnings_muted(bool muted) { g_warnings_muted.store(muted); }

}  // namespace gsturm
