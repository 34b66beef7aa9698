#pragma once

#include <map>
#include <mutex>
#include <vector>

#include "gsturm/propagator.hpp"
#include "gsturm/spectral_data.hpp"

namespace gsturm {

struct ForwardOptions {
  PropagationOptions propagation;
  /// Eigenvalues closer than this (relative to 1 + |lambda|) form one cluster.
  double merge_tol = 1e-8;
  /// Contour trapezoid nodes and convergence tolerance.
  int contour_nodes = 64;
  double contour_tol = 1e-8;
  /// Singular values below this fraction of the largest count as zero.
  double rank_tol = 1e-6;
  /// Asymptotic window check: radius in rho around n - 1/2 and n, for n > n_low.
  double window_radius = 0.45;
  int n_low = 3;
  int threads = 0;  // 0: GSTURM_THREADS or hardware concurrency
};

/// A located eigenvalue cluster.
struct EigenCluster {
  double lambda = 0.0;
  int multiplicity = 0;
  /// m - rank V(S(., lambda)) from singular values.
  int kernel_dimension = 0;
  double gap = 0.0;  // distance to the nearest other cluster
};

/// Eigenvalue counting by oscillation theory. For fixed real lambda the
/// Lagrangian plane spanned by (S, S') is followed along x through the
/// Cayley unitary Z(x) = Ub^dagger (S' + i s S)(S' - i s S)^{-1}, where Ub
/// is the Cayley unitary of the boundary plane at pi. Eigenvalues <= lambda
/// are the full turns of the eigenphases of Z(pi) relative to a level below
/// the spectrum; steps along x are small enough that no turn is missed.
class EigenvalueCounter {
 public:
  EigenvalueCounter(const MatrixProblem& problem, const PropagationOptions& opts);

  /// Lower bound of the spectrum (strictly below lambda_11).
  double lower_bound() const { return lo_; }

  /// Number of eigenvalues <= lambda, counted with multiplicity.
  int count(double lambda) const;

  /// Signed distance of the eigenphase of Z(pi) nearest to 0 (mod 2 pi);
  /// increasing through 0 at every eigenvalue.
  double crossing(double lambda, double scale) const;

  /// Phase scale used at lambda.
  static double scale_for(double lambda);

  /// A grid lower_bound = l_0 < l_1 < ... with count(l_last) >= target;
  /// returns the cells (a, b] that contain eigenvalues.
  struct Bracket {
    double a, b;
    int count;
  };
  std::vector<Bracket> scan(int target) const;

 private:
  // Winding index (F - sum of phases at pi) / 2 pi at lambda for scale s.
  long winding_index(double lambda, double s) const;
  CMatrix boundary_cayley(double s) const;

  const MatrixProblem& problem_;
  PropagationOptions opts_;
  double lo_;
  double qnorm_;
  mutable std::mutex mutex_;
  mutable std::map<double, long> base_index_;  // winding index at lo_ per scale
};

/// The first N m eigenvalues with multiplicities, numbered n = 1..N, k = 1..m.
/// Returns the entries (alpha unset) and the cluster list.
SpectralDataSet locate_eigenvalues(const MatrixProblem& problem, int N,
                                   const ForwardOptions& opts = {},
                                   std::vector<EigenCluster>* clusters = nullptr);

/// alpha = -Res M at lambda0 via the trapezoid rule on a circle of radius
/// min(gap/3, 0.1).
CMatrix compute_weight_matrix(const MatrixProblem& problem, double lambda0, int multiplicity,
                              double gap, const ForwardOptions& opts = {});

/// Independent residue: sum over an L2-orthonormal eigenbasis of Y'(0) Y'(0)^dagger.
CMatrix eigenfunction_residue_oracle(const MatrixProblem& problem, double lambda0,
                                     int multiplicity, const ForwardOptions& opts = {});

/// Eigenvalues, weight matrices, alpha' and asymptotic coefficients.
SpectralDataSet forward_spectral(const MatrixProblem& problem, int N,
                                 const ForwardOptions& opts = {});

}  // namespace gsturm
