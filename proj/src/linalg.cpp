#include "gsturm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gsturm {

void require_hermitian(const CMatrix& a, double tol, const std::string& name) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kInvalidDimension, name + " is not square");
  }
  const double defect = hermitian_defect(a);
  if (!std::isfinite(defect) || defect > tol * (1.0 + opnorm(a))) {
    std::ostringstream os;
    os << name << " is not Hermitian (||A - A^dagger|| = " << defect << ")";
    throw Error(ErrorCode::kNotHermitian, os.str());
  }
}

void require_projector(const CMatrix& p, double tol, const std::string& name) {
  if (p.rows() != p.cols()) {
    throw Error(ErrorCode::kInvalidDimension, name + " is not square");
  }
  const double herm = hermitian_defect(p);
  const double idem = opnorm(p * p - p);
  if (!(herm <= tol) || !(idem <= tol)) {
    std::ostringstream os;
    os << name << " is not an orthogonal projector (||P-P^dagger|| = " << herm
       << ", ||P^2-P|| = " << idem << ")";
    throw Error(ErrorCode::kNotProjector, os.str());
  }
}

int projector_rank(const CMatrix& p) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(p), Eigen::EigenvaluesOnly);
  int r = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > 0.5) ++r;
  }
  return r;
}

CMatrix range_basis(const CMatrix& p) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(p));
  const int m = static_cast<int>(p.rows());
  std::vector<int> cols;
  for (int i = 0; i < m; ++i) {
    if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
  }
  CMatrix b(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    b.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cols[j]);
  }
  return b;
}

CMatrix make_graph_projector(int m) {
  if (m < 2) {
    throw Error(ErrorCode::kInvalidDimension,
                "graph projector requires m >= 2, got " + std::to_string(m));
  }
  return CMatrix::Constant(m, m, cplx(1.0 / m, 0.0));
}

RVector compressed_eigenvalues(const CMatrix& a, const CMatrix& p) {
  const CMatrix b = range_basis(p);
  if (b.cols() == 0) return RVector(0);
  const CMatrix compressed = hermitian_part(b.adjoint() * a * b);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(compressed, Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}

namespace {

void check_coefficient_inputs(const CMatrix& omega, const CMatrix& h, const CMatrix& t) {
  const auto m = omega.rows();
  if (h.rows() != m || t.rows() != m || omega.cols() != m || h.cols() != m ||
      t.cols() != m) {
    throw Error(ErrorCode::kInvalidDimension, "Omega, H and T must share one dimension");
  }
  require_hermitian(omega, kTolHermitian * 100, "Omega");
  require_hermitian(h, kTolHermitian * 100, "H");
  require_projector(t, 1e-10, "T");
  const int p = projector_rank(t);
  if (p < 1 || p > m - 1) {
    throw Error(ErrorCode::kInvalidDimension,
                "rank(T) must lie in [1, m-1], got " + std::to_string(p));
  }
  if (opnorm(h - t * h * t) > kTolBoundary * (1.0 + opnorm(h))) {
    throw Error(ErrorCode::kBoundaryMismatch, "H differs from T H T");
  }
}

}  // namespace

RVector roots_P1(const CMatrix& omega, const CMatrix& h, const CMatrix& t) {
  check_coefficient_inputs(omega, h, t);
  return compressed_eigenvalues(t * (omega - h) * t, t);
}

RVector roots_P2(const CMatrix& omega, const CMatrix& h, const CMatrix& t) {
  check_coefficient_inputs(omega, h, t);
  const CMatrix tp = CMatrix::Identity(t.rows(), t.cols()) - t;
  return compressed_eigenvalues(tp * omega * tp, tp);
}

RVector roots_P2_literal(const CMatrix& h, const CMatrix& t) {
  const CMatrix tp = CMatrix::Identity(t.rows(), t.cols()) - t;
  return compressed_eigenvalues(tp * h * tp, tp);
}

CMatrix theta_matrix(const CMatrix& omega, const CMatrix& h, const CMatrix& t) {
  const CMatrix tp = CMatrix::Identity(t.rows(), t.cols()) - t;
  return hermitian_part(t * (omega - h) * t + tp * omega * tp);
}

RVector graph_P2_roots(const RVector& omega) {
  const int m = static_cast<int>(omega.size());
  const CMatrix t = make_graph_projector(m);
  const CMatrix tp = CMatrix::Identity(m, m) - t;
  const CMatrix d = omega.cast<cplx>().asDiagonal();
  return compressed_eigenvalues(tp * d * tp, tp);
}

ConstantPotentialBasis ConstantPotentialBasis::from_matrix(const CMatrix& c_matrix) {
  require_hermitian(c_matrix, kTolHermitian * 100, "constant potential");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(c_matrix));
  ConstantPotentialBasis b;
  b.C = c_matrix;
  b.c = es.eigenvalues();
  // C = V diag(c) V^dagger, so U = V^dagger.
  b.U = es.eigenvectors().adjoint();
  return b;
}

std::pair<cplx, cplx> sine_cosine(cplx a, double x) {
  if (std::abs(a) < kConstantSeriesRadius) {
    const double x2 = x * x;
    const cplx s = x * (1.0 - a * x2 / 6.0 + a * a * x2 * x2 / 120.0);
    const cplx c = 1.0 - a * x2 / 2.0 + a * a * x2 * x2 / 24.0;
    return {s, c};
  }
  const cplx nu = std::sqrt(a);
  return {std::sin(nu * x) / nu, std::cos(nu * x)};
}

std::pair<CMatrix, CMatrix> constant_S(const ConstantPotentialBasis& basis, cplx lambda,
                                       double x) {
  const int m = basis.dim();
  CVector s(m), c(m);
  for (int i = 0; i < m; ++i) {
    auto [si, ci] = sine_cosine(lambda - basis.c(i), x);
    s(i) = si;
    c(i) = ci;
  }
  CMatrix S = basis.U.adjoint() * s.asDiagonal() * basis.U;
  CMatrix Sp = basis.U.adjoint() * c.asDiagonal() * basis.U;
  return {std::move(S), std::move(Sp)};
}

namespace {

// Projectors onto root clusters of the compression of theta to Ran P;
// `zs` are the expected (sorted) roots for this block.
std::vector<CMatrix> block_projectors(const CMatrix& theta, const CMatrix& p,
                                      const RVector& zs, const char* block) {
  const CMatrix b = range_basis(p);
  const Eigen::Index r = b.cols();
  if (r != zs.size()) {
    throw Error(ErrorCode::kInconsistentCoefficients,
                std::string("root count does not match rank on ") + block);
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(b.adjoint() * theta * b));
  RVector z_sorted = zs;
  std::sort(z_sorted.data(), z_sorted.data() + z_sorted.size());
  for (Eigen::Index i = 0; i < r; ++i) {
    const double mu = es.eigenvalues()(i);
    if (std::abs(mu - z_sorted(i)) > kMultipleRootTol * (1.0 + std::abs(mu))) {
      std::ostringstream os;
      os << "eigenvalue " << mu << " of Theta on " << block << " disagrees with root "
         << z_sorted(i);
      throw Error(ErrorCode::kInconsistentCoefficients, os.str());
    }
  }
  const CMatrix vecs = b * es.eigenvectors();
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(r));
  for (Eigen::Index s = 0; s < r; ++s) {
    CMatrix a = CMatrix::Zero(p.rows(), p.cols());
    for (Eigen::Index k = 0; k < r; ++k) {
      if (std::abs(z_sorted(k) - zs(s)) <= kMultipleRootTol * (1.0 + std::abs(zs(s)))) {
        a += vecs.col(k) * vecs.col(k).adjoint();
      }
    }
    out.push_back(hermitian_part(a));
  }
  return out;
}

}  // namespace

std::vector<CMatrix> A_matrices_general(const CMatrix& theta, const CMatrix& t,
                                        const RVector& z) {
  const int m = static_cast<int>(t.rows());
  if (z.size() != m) {
    throw Error(ErrorCode::kInvalidDimension, "z must have m entries");
  }
  require_hermitian(theta, 1e-10, "Theta");
  const int p = projector_rank(t);
  const CMatrix tp = CMatrix::Identity(m, m) - t;
  auto first = block_projectors(theta, t, z.head(p), "Ran T");
  auto second = block_projectors(theta, tp, z.tail(m - p), "Ran Tperp");
  first.insert(first.end(), second.begin(), second.end());
  return first;
}

namespace {

// prod_{s not in skip} (z - omega_s)
double partial_product(const RVector& omega, double z, int skip1, int skip2) {
  double prod = 1.0;
  for (int s = 0; s < omega.size(); ++s) {
    if (s == skip1 || s == skip2) continue;
    prod *= (z - omega(s));
  }
  return prod;
}

// d/dz prod_{s != skip} (z - omega_s)
double partial_product_derivative(const RVector& omega, double z, int skip) {
  double sum = 0.0;
  for (int i = 0; i < omega.size(); ++i) {
    if (i == skip) continue;
    double prod = 1.0;
    for (int s = 0; s < omega.size(); ++s) {
      if (s == skip || s == i) continue;
      prod *= (z - omega(s));
    }
    sum += prod;
  }
  return sum;
}

}  // namespace

CMatrix graph_A_of_z(const RVector& omega, double z) {
  const int m = static_cast<int>(omega.size());
  CMatrix a(m, m);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      a(j, k) = j == k ? partial_product_derivative(omega, z, j)
                       : -partial_product(omega, z, j, k);
    }
  }
  return a;
}

double graph_P2_derivative(const RVector& omega, double z) {
  const int m = static_cast<int>(omega.size());
  double sum = 0.0;
  for (int j = 0; j < m; ++j) sum += partial_product_derivative(omega, z, j);
  return sum / m;
}

std::vector<CMatrix> A_matrices_graph(const RVector& omega, const RVector& z) {
  const int m = static_cast<int>(omega.size());
  if (z.size() != m) {
    throw Error(ErrorCode::kInvalidDimension, "z must have m entries");
  }
  const CMatrix t = make_graph_projector(m);
  bool simple = true;
  for (int s = 1; s + 1 < m; ++s) {
    if (std::abs(z(s) - z(s + 1)) < kMultipleRootTol) simple = false;
  }
  if (!simple) {
    log_warning("multiple roots of P2; using the spectral-projector construction");
    const CMatrix tp = CMatrix::Identity(m, m) - t;
    const CMatrix theta =
        z(0) * t + tp * omega.cast<cplx>().asDiagonal() * tp;
    return A_matrices_general(hermitian_part(theta), t, z);
  }
  std::vector<CMatrix> out;
  out.push_back(t);
  for (int s = 1; s < m; ++s) {
    const double d = graph_P2_derivative(omega, z(s));
    out.push_back(graph_A_of_z(omega, z(s)) / (m * d));
  }
  return out;
}

}  // namespace gsturm
