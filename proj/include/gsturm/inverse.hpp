#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "gsturm/forward.hpp"
#include "gsturm/problem.hpp"
#include "gsturm/spectral_data.hpp"

namespace gsturm {

/// Constant-potential comparison problem L~ with its spectral data.
struct ModelProblem {
  ProblemKind kind = ProblemKind::kGeneral;
  std::shared_ptr<const MatrixProblem> problem;
  ConstantPotentialBasis basis;  // Q~
  CMatrix T, H;
  double h = 0.0;  // graph case: H~ = h T
  AsymptoticCoefficients coefficients;
  SpectralDataSet data;

  int dim() const { return basis.dim(); }
};

/// L((2/pi) Theta~, T, 0) with Theta~ = sum over distinct z_s of z_s A^(s).
/// Refuses coefficients that fail the coefficient conditions.
ModelProblem build_model_general(const AsymptoticCoefficients& coeffs, int N,
                                 const ForwardOptions& opts = {});

/// Graph model: Q~ = (2/pi) diag(omega), h~ = mean(omega) - z1.
ModelProblem build_model_graph(const RVector& omega, double z1, int N,
                               const ForwardOptions& opts = {});

/// Graph model when the coefficients carry omega, general model otherwise.
ModelProblem build_model(const AsymptoticCoefficients& coeffs, int N,
                         const ForwardOptions& opts = {});

/// int_0^x s_a(t) s_b(t) dt with s_a(t) = sin(sqrt(a) t)/sqrt(a); entire in a, b.
double overlap_integral(double a, double b, double x);

/// D~(x, lambda, mu) = int_0^x S~^dagger(t, lambda) S~(t, mu) dt.
CMatrix kernel_D(const ModelProblem& model, double x, double lambda, double mu);

/// d/dx D~(x, lambda, mu) = S~^dagger(x, lambda) S~(x, mu).
CMatrix kernel_Dx(const ModelProblem& model, double x, double lambda, double mu);

/// Node (l, j, s) of the main equation: s = 0 for the data, 1 for the model.
struct NodeTag {
  int l = 0;
  int j = 0;
  int s = 0;
  bool operator==(const NodeTag&) const = default;
};

struct SpectralGroup {
  int k = 0;          // 1 for the head group, 2j and 2j+1 afterwards
  double center = 0;  // 0, n0 + j - 1/2 or n0 + j
  std::vector<NodeTag> nodes;
  std::vector<double> rho;
  /// Index sets into `nodes`; every (l, j) pair lies in a single subgroup.
  std::vector<std::vector<int>> subgroups;
  double xi = 0.0;
};

struct GroupPartition {
  int n0 = 0;
  double shift = 0.0;  // C0 used for rho = sqrt(lambda + C0)
  std::vector<SpectralGroup> groups;
  double Xi = 0.0;
};

/// Groups of rho-values of data and model; n0 is the smallest index giving
/// consecutive group intervals separated by `separation`. Throws kGrouping
/// when no n0 <= N/2 works.
GroupPartition build_groups(const SpectralDataSet& data, const SpectralDataSet& model,
                            const AsymptoticCoefficients& coeffs, double separation = 0.1);

/// Truncated main equation over the nodes l <= N of data and model. The
/// coefficient matrix is the same for all m rows of the unknowns and for
/// the x-differentiated system.
class MainEquation {
 public:
  MainEquation(const SpectralDataSet& data, const ModelProblem& model);

  struct Solution {
    double x = 0.0;
    std::vector<CMatrix> S;       // S_ljs(x), one per node
    std::vector<CMatrix> Sprime;  // filled by solve_with_derivative()
    double condition = 0.0;
    double residual = 0.0;  // relative residual after refinement
  };

  /// Solves at x. Throws kIllConditioned if the condition estimate exceeds max_condition.
  Solution solve(double x, double max_condition = 1e10) const;

  /// Same as solve() but also returns S'_ljs(x).
  Solution solve_with_derivative(double x, double max_condition = 1e10) const;

  /// eps0(x) and eps0'(x) from a solution with derivatives.
  std::pair<CMatrix, CMatrix> epsilon0(const Solution& sol) const;

  const std::vector<NodeTag>& nodes() const { return nodes_; }
  const std::vector<double>& lambdas() const { return lambda_; }

  /// Optional reordering of the unknowns (for consistency checks).
  void set_order(std::vector<int> order);

 private:
  Solution run(double x, double max_condition, bool derivative) const;

  const ModelProblem& model_;
  int m_;
  int N_;
  std::vector<NodeTag> nodes_;
  std::vector<double> lambda_;
  std::vector<double> sign_;
  std::vector<CMatrix> W_;  // U alpha' U^dagger in the eigenbasis of Q~
  std::vector<int> order_;
};

struct InverseOptions {
  int mesh_points = 257;
  double max_condition = 1e10;
  double offdiag_tol = 1e-4;
  bool enforce_diagonal = true;  // graph case: throw above offdiag_tol
  int threads = 0;
};

struct Reconstruction {
  std::vector<double> mesh;
  std::vector<CMatrix> eps0, eps, Q;
  CMatrix H;
  CMatrix eps0_pi;
  int N = 0;
  ProblemKind kind = ProblemKind::kGeneral;
  /// Graph case: q[j][i] = Q_jj(mesh[i]) and h.
  std::vector<std::vector<double>> q;
  double h = 0.0;
  double h_boundary = 0.0;  // trace of H reconstructed from eps0(pi)
  double condition_max = 0.0;
  double residual_max = 0.0;
  double herm_residual = 0.0;    // max over x of ||Q - Q^dagger|| / (1 + ||Q||)
  double offdiag_residual = 0.0;  // graph case: max off-diagonal |Q_jk|
  double eps0_origin = 0.0;       // ||eps0(0)||
  double omega_smoke = 0.0;  // ||(1/2) int eps|| = ||Omega_rec - Omega~|| (trapezoid)
};

/// eps0, eps, Q and H on a uniform mesh. Graph models additionally yield
/// q_j and h; an off-diagonal residual above offdiag_tol throws
/// kDiagonalityViolation.
Reconstruction reconstruct(const SpectralDataSet& data, const ModelProblem& model,
                           const InverseOptions& opts = {});

/// Graph-case h from the z values: mean of z_2..z_m minus z_1.
double graph_h_from_z(const RVector& z);

/// L2(0, pi) distance of two sampled matrix functions (Frobenius norm,
/// trapezoid rule on the common mesh).
double l2_distance(const std::vector<double>& mesh, const std::vector<CMatrix>& a,
                   const std::vector<CMatrix>& b);

/// Samples of Q on the mesh.
std::vector<CMatrix> sample_potential(const MatrixProblem& problem,
                                      const std::vector<double>& mesh);

std::vector<double> uniform_mesh(int points);

/// Copy of the data with rho_nk = sqrt(lambda_nk + C0) moved by delta
/// (C0 from spectrum_shift); alpha' is recomputed.
SpectralDataSet perturb_rho(const SpectralDataSet& data, int n, int k, double delta);

}  // namespace gsturm
