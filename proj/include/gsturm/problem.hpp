#pragma once

#include <memory>
#include <optional>

#include "gsturm/common.hpp"
#include "gsturm/linalg.hpp"
#include "gsturm/potential.hpp"

namespace gsturm {

enum class ProblemKind { kGeneral, kGraph };

class PropagatorCache;

/// The boundary value problem L(Q, T, H):
///   -Y'' + Q(x) Y = lambda Y,  Y(0) = 0,  T (Y'(pi) - H Y(pi)) - Tperp Y(pi) = 0.
class MatrixProblem {
 public:
  /// Validates T (orthogonal projector), H = T H T and Hermitian H. The
  /// degenerate ranks 0 (Dirichlet) and m (Robin) are accepted for forward
  /// computations; asymptotic and inverse routines call require_regular().
  static MatrixProblem general(PotentialGrid q, const CMatrix& t, const CMatrix& h);

  /// Star graph: diagonal Q, T = ones/m, H = h T.
  static MatrixProblem graph(PotentialGrid q, double h);

  int dim() const { return q_.dim(); }
  int rank() const { return p_; }
  ProblemKind kind() const { return kind_; }
  const PotentialGrid& Q() const { return q_; }
  const CMatrix& T() const { return t_; }
  const CMatrix& Tperp() const { return tp_; }
  const CMatrix& H() const { return h_; }
  /// Graph-case scalar h (0 for general problems).
  double graph_h() const { return graph_h_; }

  /// Omega = (1/2) int_0^pi Q.
  const CMatrix& Omega() const { return omega_; }

  /// Present when Q is constant; used for closed-form solutions.
  const std::optional<ConstantPotentialBasis>& constant_basis() const { return basis_; }

  /// Throws kInvalidDimension unless 1 <= rank(T) <= m-1.
  void require_regular() const;

  /// L(Q + cI, T, H).
  MatrixProblem shifted(double c) const;

  PropagatorCache& cache() const { return *cache_; }

 private:
  MatrixProblem() = default;
  void finish();

  ProblemKind kind_ = ProblemKind::kGeneral;
  PotentialGrid q_;
  CMatrix t_, tp_, h_, omega_;
  double graph_h_ = 0.0;
  int p_ = 0;
  std::optional<ConstantPotentialBasis> basis_;
  std::shared_ptr<PropagatorCache> cache_;
};

}  // namespace gsturm
