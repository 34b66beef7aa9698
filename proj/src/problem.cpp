#include "gsturm/problem.hpp"

#include "gsturm/propagator.hpp"

namespace gsturm {

MatrixProblem MatrixProblem::general(PotentialGrid q, const CMatrix& t, const CMatrix& h) {
  const int m = q.dim();
  if (m < 1) throw Error(ErrorCode::kInvalidDimension, "problem dimension must be positive");
  if (t.rows() != m || t.cols() != m || h.rows() != m || h.cols() != m) {
    throw Error(ErrorCode::kInvalidDimension, "T and H must be m x m");
  }
  require_projector(t, 1e-10, "T");
  require_hermitian(h, kTolHermitian, "H");
  if (opnorm(h - t * h * t) > kTolBoundary * (1.0 + opnorm(h))) {
    throw Error(ErrorCode::kBoundaryMismatch, "H must satisfy H = T H T");
  }
  MatrixProblem p;
  p.kind_ = ProblemKind::kGeneral;
  p.q_ = std::move(q);
  p.t_ = hermitian_part(t);
  p.h_ = hermitian_part(h);
  p.finish();
  return p;
}

MatrixProblem MatrixProblem::graph(PotentialGrid q, double h) {
  const int m = q.dim();
  if (!q.is_diagonal()) {
    throw Error(ErrorCode::kInvalidDimension, "graph potentials must be diagonal");
  }
  MatrixProblem p;
  p.kind_ = ProblemKind::kGraph;
  p.q_ = std::move(q);
  p.t_ = make_graph_projector(m);
  p.h_ = h * p.t_;
  p.graph_h_ = h;
  p.finish();
  return p;
}

void MatrixProblem::finish() {
  const int m = q_.dim();
  tp_ = CMatrix::Identity(m, m) - t_;
  p_ = projector_rank(t_);
  omega_ = 0.5 * q_.integral();
  if (kind_ == ProblemKind::kGraph) {
    const RVector d = omega_.diagonal().real();
    omega_ = d.cast<cplx>().asDiagonal();
  }
  if (q_.constant_value()) basis_ = ConstantPotentialBasis::from_matrix(*q_.constant_value());
  cache_ = std::make_shared<PropagatorCache>(q_);
}

void MatrixProblem::require_regular() const {
  if (p_ < 1 || p_ > dim() - 1) {
    throw Error(ErrorCode::kInvalidDimension,
                "rank(T) must lie in [1, m-1], got " + std::to_string(p_));
  }
}

MatrixProblem MatrixProblem::shifted(double c) const {
  if (kind_ == ProblemKind::kGraph) return graph(q_.shifted(c), graph_h_);
  return general(q_.shifted(c), t_, h_);
}

}  // namespace gsturm
