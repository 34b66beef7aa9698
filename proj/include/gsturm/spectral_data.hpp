#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsturm/common.hpp"
#include "gsturm/problem.hpp"

namespace gsturm {

/// Leading asymptotic coefficients of eigenvalues and weight matrices.
struct AsymptoticCoefficients {
  ProblemKind kind = ProblemKind::kGeneral;
  int m = 0;
  int p = 0;
  CMatrix T, Tperp;
  /// Omega and H are known when built from a problem; for fitted
  /// coefficients only Theta is available in the general case.
  std::optional<CMatrix> Omega;
  std::optional<CMatrix> H;
  CMatrix Theta;
  RVector z;
  std::vector<CMatrix> A;
  /// Graph case: mean values omega_j.
  std::optional<RVector> omega;
};

struct SpectralEntry {
  int n = 0;
  int k = 0;
  double lambda = 0.0;
  CMatrix alpha;
  CMatrix alpha_prime;
};

/// Spectral data {lambda_nk, alpha_nk}, n = 1..N, k = 1..m, stored in the
/// lexicographic order of (n, k).
struct SpectralDataSet {
  int m = 0;
  int N = 0;
  /// C0 such that lambda + C0 >= 1 > 0; rho = sqrt(lambda + shift).
  double shift = 0.0;
  std::string provenance = "computed";
  std::vector<SpectralEntry> entries;
  std::optional<AsymptoticCoefficients> coefficients;

  std::size_t index(int n, int k) const {
    return static_cast<std::size_t>((n - 1) * m + (k - 1));
  }
  const SpectralEntry& at(int n, int k) const { return entries.at(index(n, k)); }
  SpectralEntry& at(int n, int k) { return entries.at(index(n, k)); }
  double rho(std::size_t i) const { return std::sqrt(entries[i].lambda + shift); }
  double min_lambda() const;

  /// Copy restricted to n <= n_max.
  SpectralDataSet truncated(int n_max) const;
};

/// Groups of equal eigenvalues: indices (into entries) of maximal runs with
/// lambda equal within tol * (1 + |lambda|).
std::vector<std::vector<std::size_t>> multiplicity_groups(const SpectralDataSet& data,
                                                          double tol = 1e-10);

/// alpha' = alpha for the head of every multiplicity group and 0 for the
/// rest. Throws kSdViolation when alphas within a group differ by more
/// than 1e-8 (relative).
SpectralDataSet dedup_alpha(SpectralDataSet data);

/// max(0, 1 - min lambda) over the given data sets.
double spectrum_shift(const std::vector<const SpectralDataSet*>& sets);

}  // namespace gsturm
