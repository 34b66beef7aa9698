#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gsturm/common.hpp"

namespace gsturm {

using MatrixFunction = std::function<CMatrix(double)>;

/// Hermitian matrix potential sampled on [0, pi].
///
/// Between samples the potential is evaluated by local four-point cubic
/// Lagrange interpolation. A grid built from a closed-form function keeps the
/// function and evaluates it exactly; the samples are then only used for
/// output and serialization.
class PotentialGrid {
 public:
  static constexpr int kMinIntervals = 64;
  static constexpr int kDefaultNodes = 1025;

  PotentialGrid() = default;
  PotentialGrid(std::vector<double> mesh, std::vector<CMatrix> values);

  /// Samples f on a uniform mesh of `nodes` points and keeps f as evaluator.
  static PotentialGrid from_function(int m, const MatrixFunction& f,
                                     int nodes = kDefaultNodes);
  static PotentialGrid constant(const CMatrix& c, int nodes = kMinIntervals + 1);
  static PotentialGrid zero(int m, int nodes = kMinIntervals + 1);

  int dim() const { return dim_; }
  const std::vector<double>& mesh() const { return mesh_; }
  const std::vector<CMatrix>& values() const { return values_; }

  CMatrix operator()(double x) const;

  /// Integral of Q over [0, pi].
  CMatrix integral() const;

  /// Set when Q is constant on [0, pi].
  const std::optional<CMatrix>& constant_value() const { return constant_; }

  bool is_diagonal(double tol = 1e-14) const;

  /// Q + c I.
  PotentialGrid shifted(double c) const;

 private:
  void validate() const;

  int dim_ = 0;
  std::vector<double> mesh_;
  std::vector<CMatrix> values_;
  MatrixFunction exact_;
  std::optional<CMatrix> constant_;
  bool uniform_ = false;
};

}  // namespace gsturm
