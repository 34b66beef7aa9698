#include <cmath>

#include "doctest.h"
#include "gsturm/linalg.hpp"
#include "test_helpers.hpp"

using namespace gsturm;
using gsturm::testing::maxabs;

namespace {

// Root of f in [a, b] by bisection; f(a), f(b) of opposite sign.
template <class F>
double bisect(F f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if ((fm < 0) == (fa < 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

CMatrix diag(std::initializer_list<double> v) {
  RVector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<cplx>().asDiagonal();
}

}  // namespace

TEST_CASE("graph projector") {
  const CMatrix t2 = make_graph_projector(2);
  CHECK(maxabs(t2 - CMatrix::Constant(2, 2, 0.5)) == 0.0);
  CHECK(maxabs(t2 * t2 - t2) == 0.0);
  const CMatrix t3 = make_graph_projector(3);
  CHECK(maxabs(t3 - CMatrix::Constant(3, 3, 1.0 / 3.0)) == 0.0);
  CHECK(projector_rank(t3) == 1);
  CHECK_THROWS_AS(make_graph_projector(1), Error);
}

TEST_CASE("P1 roots") {
  const CMatrix t3 = make_graph_projector(3);
  CHECK(roots_P1(CMatrix::Zero(3, 3), CMatrix::Zero(3, 3), t3).cwiseAbs().maxCoeff() < 1e-15);

  const CMatrix t2 = make_graph_projector(2);
  const RVector z2 = roots_P1(diag({1, 3}), CMatrix::Zero(2, 2), t2);
  REQUIRE(z2.size() == 1);
  CHECK(z2(0) == doctest::Approx(2.0).epsilon(1e-14));

  // Brute-force scan of z^{p-m} det(zI - T(Omega-H)T) over the full space.
  const CMatrix omega = diag({1, 2, 3});
  const CMatrix a = t3 * omega * t3;
  auto p1 = [&](double z) {
    return ((z * CMatrix::Identity(3, 3) - a).determinant() / (z * z)).real();
  };
  double root = NAN;
  for (double z = 0.05; z < 5.0; z += 0.1) {
    if ((p1(z) < 0) != (p1(z + 0.1) < 0)) root = bisect(p1, z, z + 0.1);
  }
  const RVector z3 = roots_P1(omega, CMatrix::Zero(3, 3), t3);
  CHECK(z3(0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::abs(z3(0) - root) < 1e-10);

  // H != THT is rejected.
  CMatrix bad = CMatrix::Zero(3, 3);
  bad(0, 0) = 1.0;
  CHECK_THROWS_AS(roots_P1(omega, bad, t3), Error);
  CHECK_THROWS_AS(roots_P1(omega, CMatrix::Zero(3, 3), CMatrix::Identity(3, 3)), Error);
}

TEST_CASE("P2 roots") {
  const CMatrix t2 = make_graph_projector(2);
  const RVector z = roots_P2(diag({0.7, -1.9}), CMatrix::Zero(2, 2), t2);
  REQUIRE(z.size() == 1);
  CHECK(z(0) == doctest::Approx((0.7 - 1.9) / 2).epsilon(1e-14));

  const CMatrix t3 = make_graph_projector(3);
  CHECK(roots_P2(CMatrix::Zero(3, 3), CMatrix::Zero(3, 3), t3).cwiseAbs().maxCoeff() < 1e-15);

  // omega = (0,1,2): P2(z) = (1/3)(3z^2 - 6z + 2), roots of z^2 - 2z + 2/3.
  auto p2 = [](double x) { return (3 * x * x - 6 * x + 2) / 3.0; };
  const double r1 = bisect(p2, 0.0, 1.0);
  const double r2 = bisect(p2, 1.0, 2.0);
  const RVector zz = roots_P2(diag({0, 1, 2}), CMatrix::Zero(3, 3), t3);
  REQUIRE(zz.size() == 2);
  CHECK(std::abs(zz(0) - r1) < 1e-12);
  CHECK(std::abs(zz(1) - r2) < 1e-12);
  const RVector zg = graph_P2_roots(RVector::LinSpaced(3, 0, 2));
  CHECK(std::abs(zg(0) - r1) < 1e-12);
  CHECK(std::abs(zg(1) - r2) < 1e-12);

  // The literal compression of H vanishes whenever H = THT.
  CHECK(roots_P2_literal(0.3 * t3, t3).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("roots invariant under unitary conjugation commuting with T") {
  std::mt19937 rng(11);
  const int m = 4;
  CMatrix t = CMatrix::Zero(m, m);
  const CMatrix u0 = gsturm::testing::random_unitary(m, rng);
  t = u0.leftCols(2) * u0.leftCols(2).adjoint();
  const CMatrix tp = CMatrix::Identity(m, m) - t;
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix omega = gsturm::testing::random_hermitian(m, rng);
    const CMatrix h = t * gsturm::testing::random_hermitian(m, rng) * t;
    // U = exp(iK) with K = T K1 T + Tperp K2 Tperp commutes with T.
    const CMatrix k = t * gsturm::testing::random_hermitian(m, rng) * t +
                      tp * gsturm::testing::random_hermitian(m, rng) * tp;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(k));
    CVector ph(m);
    for (int i = 0; i < m; ++i) ph(i) = std::exp(cplx(0, es.eigenvalues()(i)));
    const CMatrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    const CMatrix omega2 = hermitian_part(u * omega * u.adjoint());
    const CMatrix h2 = hermitian_part(u * h * u.adjoint());
    CHECK((roots_P1(omega, h, t) - roots_P1(omega2, h2, t)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((roots_P2(omega, h, t) - roots_P2(omega2, h2, t)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("constant_S closed forms") {
  const auto zero = ConstantPotentialBasis::from_matrix(CMatrix::Zero(3, 3));
  {
    auto [s, sp] = constant_S(zero, 1.0, kPi / 2);
    CHECK(maxabs(s - CMatrix::Identity(3, 3)) < 1e-15);
    CHECK(maxabs(sp) < 1e-15);
  }
  {
    auto [s, sp] = constant_S(zero, 0.0, kPi);
    CHECK(maxabs(s - kPi * CMatrix::Identity(3, 3)) < 1e-15);
    CHECK(maxabs(sp - CMatrix::Identity(3, 3)) < 1e-15);
  }
  {
    const auto b = ConstantPotentialBasis::from_matrix(diag({1, 2}));
    auto [s, sp] = constant_S(b, 3.0, 1.0);
    CHECK(std::abs(s(0, 0) - std::sin(std::sqrt(2.0)) / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(s(1, 1) - std::sin(1.0)) < 1e-15);
    CHECK(std::abs(s(0, 1)) < 1e-15);
  }
  // Series branch against the direct formula just outside its radius.
  for (double a : {9e-7, -9e-7, 1.1e-6}) {
    auto [s1, c1] = sine_cosine(cplx(a, 0), kPi);
    const cplx nu = std::sqrt(cplx(a, 0));
    CHECK(std::abs(s1 - std::sin(nu * kPi) / nu) < 1e-12);
    CHECK(std::abs(c1 - std::cos(nu * kPi)) < 1e-12);
  }
}

TEST_CASE("constant_S self-Wronskian vanishes") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ud(-5.0, 900.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = ConstantPotentialBasis::from_matrix(gsturm::testing::random_hermitian(3, rng));
    CHECK(maxabs(b.U * b.U.adjoint() - CMatrix::Identity(3, 3)) < 1e-12);
    CHECK(opnorm(b.U.adjoint() * b.c.cast<cplx>().asDiagonal() * b.U - b.C) < 1e-10);
    const cplx lam(ud(rng), 2.0 * unit(rng) - 1.0);
    const double x = unit(rng) * kPi;
    auto [sl, slp] = constant_S(b, std::conj(lam), x);
    auto [s, sp] = constant_S(b, lam, x);
    const CMatrix w = sl.adjoint() * sp - slp.adjoint() * s;
    CHECK(maxabs(w) < 1e-10 * (1.0 + std::abs(lam)) * std::max(1.0, opnorm(s) * opnorm(sp)));
  }
}

TEST_CASE("A matrices: zero Theta gives T and Tperp") {
  const CMatrix t = make_graph_projector(3);
  const auto a = A_matrices_general(CMatrix::Zero(3, 3), t, RVector::Zero(3));
  REQUIRE(a.size() == 3);
  CHECK(maxabs(a[0] - t) < 1e-14);
  CHECK(maxabs(a[1] - (CMatrix::Identity(3, 3) - t)) < 1e-14);
  CHECK(maxabs(a[2] - a[1]) < 1e-14);
}

TEST_CASE("A matrices: graph residue formula") {
  {
    RVector omega(2);
    omega << 0, 2;
    RVector z(2);
    z << 0.3, 1.0;
    const auto a = A_matrices_graph(omega, z);
    CMatrix expect(2, 2);
    expect << 0.5, -0.5, -0.5, 0.5;
    CHECK(graph_P2_derivative(omega, 1.0) == doctest::Approx(1.0));
    CHECK(maxabs(a[1] - expect) < 1e-14);
    CHECK(maxabs(a[0] - make_graph_projector(2)) == 0.0);
  }
  {
    const RVector omega = RVector::LinSpaced(3, 0, 2);
    RVector z(3);
    z(0) = -0.4;
    z.tail(2) = graph_P2_roots(omega);
    const auto ag = A_matrices_graph(omega, z);
    const CMatrix t = make_graph_projector(3);
    const CMatrix tp = CMatrix::Identity(3, 3) - t;
    const CMatrix theta = z(0) * t + tp * omega.cast<cplx>().asDiagonal() * tp;
    const auto an = A_matrices_general(theta, t, z);
    for (int s = 0; s < 3; ++s) {
      CHECK(maxabs(ag[s] - an[s]) < 1e-8);
      CHECK(opnorm(ag[s] * ag[s] - ag[s]) < 1e-10);
      CHECK(opnorm(ag[s] - ag[s].adjoint()) < 1e-10);
    }
    CHECK(opnorm(ag[1] + ag[2] - tp) < 1e-10);
    CHECK(opnorm(ag[1] * ag[2]) < 1e-10);
    CHECK(opnorm(ag[0] * ag[1]) < 1e-10);
  }
  {
    // Equal omega: double root of P2, general fallback gives Tperp.
    set_warnings_muted(true);
    const RVector omega = RVector::Constant(3, 0.7);
    RVector z(3);
    z << 0.1, 0.7, 0.7;
    const auto a = A_matrices_graph(omega, z);
    set_warnings_muted(false);
    const CMatrix tp = CMatrix::Identity(3, 3) - make_graph_projector(3);
    CHECK(maxabs(a[1] - tp) < 1e-12);
    CHECK(maxabs(a[2] - tp) < 1e-12);
  }
}

TEST_CASE("A matrices: random general coefficients satisfy the projector conditions") {
  std::mt19937 rng(3);
  const int m = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix u = gsturm::testing::random_unitary(m, rng);
    const CMatrix t = u.leftCols(2) * u.leftCols(2).adjoint();
    const CMatrix omega = gsturm::testing::random_hermitian(m, rng);
    const CMatrix h = t * gsturm::testing::random_hermitian(m, rng) * t;
    RVector z(m);
    z.head(2) = roots_P1(omega, h, t);
    z.tail(2) = roots_P2(omega, h, t);
    const auto a = A_matrices_general(theta_matrix(omega, h, t), t, z);
    CHECK(opnorm(a[0] + a[1] - t) < 1e-10);
    CHECK(opnorm(a[2] + a[3] - (CMatrix::Identity(m, m) - t)) < 1e-10);
    for (int s = 0; s < m; ++s) {
      CHECK(opnorm(a[s] * a[s] - a[s]) < 1e-10);
      CHECK(projector_rank(a[s]) == 1);
      for (int k = 0; k < m; ++k) {
        if (k != s) CHECK(opnorm(a[s] * a[k]) < 1e-10);
      }
    }
    RVector zbad = z;
    zbad(0) += 1e-3;
    CHECK_THROWS_AS(A_matrices_general(theta_matrix(omega, h, t), t, zbad), Error);
  }
}
