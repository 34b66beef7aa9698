#pragma once

#include <random>

#include "gsturm/common.hpp"

namespace gsturm::testing {

inline CMatrix random_hermitian(int m, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  CMatrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  return 0.5 * (a + a.adjoint());
}

inline CMatrix random_unitary(int m, std::mt19937& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  Eigen::HouseholderQR<CMatrix> qr(a);
  return qr.householderQ() * CMatrix::Identity(m, m);
}

inline double maxabs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace gsturm::testing
