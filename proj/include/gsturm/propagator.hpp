#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "gsturm/problem.hpp"

namespace gsturm {

struct PropagationOptions {
  /// Minimum number of uniform steps on [0, pi].
  int base_steps = 512;
  /// Upper limit on steps; exceeding it is a resolution error.
  int max_steps = 65536;
  /// When positive, use exactly this many steps (mesh-refinement studies).
  int fixed_steps = 0;
  /// Store the solution at every step node.
  bool record = false;
  /// Use closed forms for constant potentials.
  bool allow_closed_form = true;
};

/// Y, Y' on the step nodes (ascending x). Without recording only the
/// initial and final nodes are present.
struct SolutionPair {
  cplx lambda;
  std::vector<double> x;
  std::vector<CMatrix> Y;
  std::vector<CMatrix> Yp;
};

/// Matrix Wronskian <Y, Z> = Y Z' - Y' Z.
CMatrix wronskian(const CMatrix& y, const CMatrix& yp, const CMatrix& z, const CMatrix& zp);

/// Number of uniform steps used for lambda under the options.
int required_steps(cplx lambda, const PropagationOptions& opts);

/// S(x, lambda): S(0) = 0, S'(0) = I.
SolutionPair propagate_S(const MatrixProblem& problem, cplx lambda,
                         const PropagationOptions& opts = {});

/// Psi(x, lambda): Psi(pi) = T, Psi'(pi) = Tperp + H T, integrated from pi to 0.
SolutionPair propagate_Psi(const MatrixProblem& problem, cplx lambda,
                           const PropagationOptions& opts = {});

/// Calls visit(x, Y, Y') at every step node for a frame spanning the same
/// Lagrangian plane as (S, S'): the frame is renormalized by a right factor
/// whenever it grows, so Y need not equal S.
using FrameVisitor = std::function<void(double, const CMatrix&, const CMatrix&)>;
void visit_S_frames(const MatrixProblem& problem, cplx lambda, const PropagationOptions& opts,
                    const FrameVisitor& visit);

/// (S(pi), S'(pi)) without recording.
std::pair<CMatrix, CMatrix> S_at_pi(const MatrixProblem& problem, cplx lambda,
                                    const PropagationOptions& opts = {});

/// (Psi(0), Psi'(0)) without recording.
std::pair<CMatrix, CMatrix> Psi_at_zero(const MatrixProblem& problem, cplx lambda,
                                        const PropagationOptions& opts = {});

/// V(Y) = T (Y'(pi) - H Y(pi)) - Tperp Y(pi).
CMatrix boundary_form(const CMatrix& y_pi, const CMatrix& yp_pi, const CMatrix& t,
                      const CMatrix& h);

/// M(lambda) = Psi'(0) Psi(0)^{-1}; throws kPoleProximity when cond(Psi(0)) > 1e12.
CMatrix weyl_matrix(const MatrixProblem& problem, cplx lambda,
                    const PropagationOptions& opts = {});

/// det V(S(., lambda)).
cplx char_det(const MatrixProblem& problem, cplx lambda, const PropagationOptions& opts = {});

struct MagnusTable;

/// Per-problem cache of lambda-independent step data, keyed by step count.
class PropagatorCache {
 public:
  explicit PropagatorCache(PotentialGrid q) : q_(std::move(q)) {}
  std::shared_ptr<const MagnusTable> table(int steps);

 private:
  PotentialGrid q_;
  std::mutex mutex_;
  std::map<int, std::shared_ptr<const MagnusTable>> tables_;
};

}  // namespace gsturm
