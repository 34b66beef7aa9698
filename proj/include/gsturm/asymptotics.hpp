#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gsturm/problem.hpp"
#include "gsturm/spectral_data.hpp"

namespace gsturm {

/// Omega, Theta, z and A^(s) of a problem.
AsymptoticCoefficients coefficients_from_problem(const MatrixProblem& problem);

/// Graph-case coefficients from mean values omega_j and z_1.
AsymptoticCoefficients graph_coefficients(const RVector& omega, double z1);

/// General coefficients from T, Theta and p (z and A from the compressions of Theta).
AsymptoticCoefficients general_coefficients(const CMatrix& t, const CMatrix& theta);

/// Asymptotic center of rho_nk: n - 1/2 for k <= p, n otherwise.
double asymptotic_center(int n, int k, int p);

/// Signed square root: sqrt(lambda) for lambda >= 0, -sqrt(-lambda) otherwise.
double signed_root(double lambda);

struct ResidualReport {
  int N = 0;
  /// kappa[n-1][k-1] = n (rho_nk - center - z_k / (pi n)).
  std::vector<std::vector<double>> kappa;
  /// ||K_n|| for the alpha^I, alpha^II and alpha^(s) relations (n = 1..N).
  std::vector<double> K_I, K_II;
  std::vector<std::vector<double>> K_s;  // [s-1][n-1]
  /// Deviation of the normalized alpha sums from T and Tperp, per n.
  std::vector<double> alpha_I_deviation, alpha_II_deviation;
  /// Cumulative l2 norm of kappa over n = 1..j.
  std::vector<double> kappa_partial_l2;
  double kappa_tail_max = 0.0;  // max |kappa| over n in [N/2, N]
  double K_tail_max = 0.0;
  double alpha_tail_deviation = 0.0;  // max deviation over n in [N/2, N]
  RVector z_fit;
};

ResidualReport residuals(const SpectralDataSet& data, const AsymptoticCoefficients& coeffs);

/// Least-squares z_k from pi n (rho_nk - center) = z_k + b_k / n + c_k / n^2
/// over n in [N/2, N].
RVector fit_z(const SpectralDataSet& data, int p);

/// Coefficients estimated from the data tail alone (p, T, z, A).
AsymptoticCoefficients fit_coefficients(const SpectralDataSet& data, ProblemKind kind);

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;
  std::vector<std::pair<int, int>> offenders;  // (n, k)
  double value = 0.0;
};

/// Realness, Hermitian nonnegative alpha, equal lambda => equal alpha,
/// rank = multiplicity and monotone numbering.
std::vector<CheckResult> check_SD(const SpectralDataSet& data);

/// Projector, sum, rank and orthogonality conditions on A^(s); graph
/// coefficients are also checked against P2 and the residue formula.
std::vector<CheckResult> check_coefficient_conditions(const AsymptoticCoefficients& coeffs,
                                         double tol = 1e-8);

/// Residual-based checks: asymptotics_kappa and asymptotics_alpha.
std::vector<CheckResult> check_asymptotics(const ResidualReport& report);

struct SurrogateReport {
  int mesh_t = 0;
  int size = 0;
  double smallest_singular_value = 0.0;
  double threshold = 1e-6;
  bool pass = false;
  std::string label =
      "finite surrogate: no finite obstruction to completeness; not a proof of completeness";
};

/// Orthonormal basis vectors E_nk of Ran(alpha) per multiplicity group:
/// eigenvectors by descending eigenvalue, largest component real positive.
std::vector<CVector> completeness_vectors(const SpectralDataSet& data);

/// Smallest singular value of the Gram matrix of E_nk sin(rho_nk t)/rho_nk
/// on a uniform t-mesh of mesh_t points (trapezoid weights).
SurrogateReport completeness_surrogate(const SpectralDataSet& data, int mesh_t,
                                       double threshold = 1e-6);

}  // namespace gsturm
