#pragma once

#include <utility>
#include <vector>

#include "gsturm/common.hpp"

namespace gsturm {

inline constexpr double kTolHermitian = 1e-12;
inline constexpr double kTolProjector = 1e-12;
inline constexpr double kTolBoundary = 1e-10;
inline constexpr double kMultipleRootTol = 1e-8;
inline constexpr double kConstantSeriesRadius = 1e-6;

/// Throws kNotHermitian when ||A - A^dagger|| exceeds tol (relative to 1+||A||).
void require_hermitian(const CMatrix& a, double tol, const std::string& name);

/// Throws kNotProjector unless P is Hermitian and idempotent within tol.
void require_projector(const CMatrix& p, double tol, const std::string& name);

/// Number of eigenvalues of a Hermitian projector above 1/2.
int projector_rank(const CMatrix& p);

/// Orthonormal basis (columns) of Ran P for an orthogonal projector.
CMatrix range_basis(const CMatrix& p);

/// T with every entry 1/m: the projector onto constant vectors.
CMatrix make_graph_projector(int m);

/// Sorted eigenvalues of B^dagger A B where B spans Ran P.
RVector compressed_eigenvalues(const CMatrix& a, const CMatrix& p);

/// z_1..z_p: eigenvalues of T (Omega - H) T on Ran T.
RVector roots_P1(const CMatrix& omega, const CMatrix& h, const CMatrix& t);

/// z_{p+1}..z_m: eigenvalues of Tperp Omega Tperp on Ran Tperp.
RVector roots_P2(const CMatrix& omega, const CMatrix& h, const CMatrix& t);

/// Eigenvalues of Tperp H Tperp on Ran Tperp (diagnostic only; zero whenever H = THT).
RVector roots_P2_literal(const CMatrix& h, const CMatrix& t);

/// Theta = T (Omega - H) T + Tperp Omega Tperp.
CMatrix theta_matrix(const CMatrix& omega, const CMatrix& h, const CMatrix& t);

/// Roots of (1/m) d/dz prod_j (z - omega_j), sorted; computed as the
/// eigenvalues of Tperp diag(omega) Tperp on Ran Tperp.
RVector graph_P2_roots(const RVector& omega);

/// Constant Hermitian potential C = U^dagger diag(c) U.
struct ConstantPotentialBasis {
  CMatrix C;
  CMatrix U;
  RVector c;

  static ConstantPotentialBasis from_matrix(const CMatrix& c_matrix);
  int dim() const { return static_cast<int>(c.size()); }
};

/// sin(nu x)/nu and cos(nu x) with nu^2 = a; entire in a.
std::pair<cplx, cplx> sine_cosine(cplx a, double x);

/// (S, S') of -Y'' + C Y = lambda Y, S(0)=0, S'(0)=I, in closed form.
std::pair<CMatrix, CMatrix> constant_S(const ConstantPotentialBasis& basis, cplx lambda,
                                       double x);

/// A^(1..m): spectral projectors of Theta per root cluster, separately on
/// Ran T (s <= p) and Ran Tperp (s > p). Throws kInconsistentCoefficients if
/// the eigenvalues of Theta disagree with z by more than 1e-8.
std::vector<CMatrix> A_matrices_general(const CMatrix& theta, const CMatrix& t,
                                        const RVector& z);

/// Graph-case A^(s): A^(1) = T and (1/m) A(z_s) / P2'(z_s) for s >= 2.
/// Falls back to A_matrices_general (with a warning) at multiple roots.
std::vector<CMatrix> A_matrices_graph(const RVector& omega, const RVector& z);

/// Entry-wise polynomial matrix A(z) of the graph residue formula.
CMatrix graph_A_of_z(const RVector& omega, double z);

/// Derivative of P2(z) = (1/m) d/dz prod (z - omega_j).
double graph_P2_derivative(const RVector& omega, double z);

}  // namespace gsturm
