#include <cmath>

#include "doctest.h"
#include "gsturm/propagator.hpp"
#include "test_helpers.hpp"

using namespace gsturm;
using gsturm::testing::maxabs;

namespace {

PropagationOptions numeric() {
  PropagationOptions o;
  o.allow_closed_form = false;
  return o;
}

MatrixProblem zero_graph(int m, double h = 0.0) {
  return MatrixProblem::graph(PotentialGrid::zero(m), h);
}

// Smooth non-commuting test potential.
CMatrix smooth_q(double x) {
  CMatrix q(3, 3);
  q << std::cos(x), 0.2, cplx(0.1 * x, 0.3), 0.2, std::sin(2 * x), 0.1,
      cplx(0.1 * x, -0.3), 0.1, x - 1.5;
  return q;
}

// Classical RK4 for the scalar equation y'' = (q - lambda) y.
std::pair<double, double> rk4_scalar(double (*q)(double), double lambda, int steps) {
  const double h = kPi / steps;
  double y = 0.0, yp = 1.0;
  auto f = [&](double x, double a, double b) {
    return std::pair<double, double>{b, (q(x) - lambda) * a};
  };
  for (int i = 0; i < steps; ++i) {
    const double x = i * h;
    auto [k1a, k1b] = f(x, y, yp);
    auto [k2a, k2b] = f(x + h / 2, y + h / 2 * k1a, yp + h / 2 * k1b);
    auto [k3a, k3b] = f(x + h / 2, y + h / 2 * k2a, yp + h / 2 * k2b);
    auto [k4a, k4b] = f(x + h, y + h * k3a, yp + h * k3b);
    y += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    yp += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
  }
  return {y, yp};
}

double cosine(double x) { return std::cos(x); }

}  // namespace

TEST_CASE("zero potential S at pi") {
  const auto p = zero_graph(3);
  auto [s, sp] = S_at_pi(p, 4.0, numeric());
  CHECK(maxabs(s) < 1e-12);
  CHECK(maxabs(sp - CMatrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("constant shift of the potential shifts lambda") {
  const auto p0 = zero_graph(2);
  const auto pc = MatrixProblem::graph(PotentialGrid::constant(2.5 * CMatrix::Identity(2, 2)), 0.0);
  for (double lam : {-3.0, 0.7, 10.0, 200.0}) {
    auto a = S_at_pi(pc, lam, numeric());
    auto b = S_at_pi(p0, lam - 2.5, numeric());
    CHECK(maxabs(a.first - b.first) < 1e-11);
    CHECK(maxabs(a.second - b.second) < 1e-10);
  }
}

TEST_CASE("scalar S against an independent fine RK4 integrator") {
  const auto q = PotentialGrid::from_function(1, [](double x) {
    return CMatrix::Constant(1, 1, std::cos(x));
  });
  const auto p = MatrixProblem::general(q, CMatrix::Zero(1, 1), CMatrix::Zero(1, 1));
  auto [ref_y, ref_yp] = rk4_scalar(cosine, 1.0, 40000);
  auto [s, sp] = S_at_pi(p, 1.0);
  CHECK(std::abs(s(0, 0) - ref_y) < 1e-9);
  CHECK(std::abs(sp(0, 0) - ref_yp) < 1e-9);
}

TEST_CASE("Psi for zero potential") {
  const auto p = zero_graph(3);
  const CMatrix tp = p.Tperp();
  auto [psi, psip] = Psi_at_zero(p, 0.25, numeric());
  CHECK(maxabs(psi + 2.0 * tp) < 1e-11);
  auto sol = propagate_Psi(p, 7.3, numeric());
  CHECK(maxabs(boundary_form(sol.Y.back(), sol.Yp.back(), p.T(), p.H())) < 1e-15);
}

TEST_CASE("Psi numerical vs closed form for random constant Hermitian Q") {
  std::mt19937 rng(21);
  const CMatrix t = make_graph_projector(3);
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix c = gsturm::testing::random_hermitian(3, rng);
    const auto p = MatrixProblem::general(PotentialGrid::constant(c), t, 0.4 * t);
    for (cplx lam : {cplx(3.1, 0), cplx(50.0, 0.05), cplx(-2.0, 0)}) {
      auto a = Psi_at_zero(p, lam, numeric());
      auto b = Psi_at_zero(p, lam);
      CHECK(maxabs(a.first - b.first) < 1e-9);
      CHECK(maxabs(a.second - b.second) < 1e-9 * (1 + std::abs(lam)));
      auto sa = S_at_pi(p, lam, numeric());
      const auto basis = ConstantPotentialBasis::from_matrix(c);
      auto sb = constant_S(basis, lam, kPi);
      CHECK(maxabs(sa.first - sb.first) < 1e-9);
      CHECK(maxabs(sa.second - sb.second) < 1e-9 * (1 + std::abs(lam)));
    }
  }
}

TEST_CASE("boundary form for zero potential and linearity in h") {
  const auto p = zero_graph(3);
  const CMatrix t = p.T();
  for (double rho : {0.3, 1.7, 4.2}) {
    auto [s, sp] = S_at_pi(p, rho * rho, numeric());
    const CMatrix v = boundary_form(s, sp, t, p.H());
    const CMatrix expect =
        std::cos(rho * kPi) * t - std::sin(rho * kPi) / rho * p.Tperp();
    CHECK(maxabs(v - expect) < 1e-11);
    const CMatrix vh = boundary_form(s, sp, t, 0.7 * t);
    CHECK(maxabs(vh - v + 0.7 * t * s) < 1e-15);
  }
}

TEST_CASE("Weyl matrix for zero potential") {
  const auto p = zero_graph(2);
  const CMatrix m = weyl_matrix(p, 0.0625, numeric());
  CHECK(maxabs(m - (0.25 * p.T() - 0.25 * p.Tperp())) < 1e-10);
  for (double rho : {0.6, 2.3, 7.8, 29.7}) {
    const CMatrix w = weyl_matrix(zero_graph(3), rho * rho, numeric());
    const CMatrix t = make_graph_projector(3);
    const CMatrix expect = rho * std::tan(rho * kPi) * t -
                           rho / std::tan(rho * kPi) * (CMatrix::Identity(3, 3) - t);
    CHECK(maxabs(w - expect) < 1e-9 * (1 + maxabs(expect)));
  }
  CHECK_THROWS_AS(weyl_matrix(p, 1.0), Error);
}

TEST_CASE("Weyl matrix is Hermitian on the real axis") {
  const auto q = PotentialGrid::from_function(3, smooth_q);
  const CMatrix t = make_graph_projector(3);
  const auto p = MatrixProblem::general(q, t, -0.3 * t);
  for (double lam : {-1.3, 2.2, 17.9, 150.4}) {
    const CMatrix m = weyl_matrix(p, lam);
    CHECK(hermitian_defect(m) <= 1e-8 * (1 + opnorm(m)));
  }
}

TEST_CASE("characteristic determinant") {
  const auto p = zero_graph(3);
  for (double rho : {0.37, 1.5, 2.0, 3.3}) {
    const cplx d = char_det(p, rho * rho, numeric());
    const double s = std::sin(rho * kPi) / rho;
    CHECK(std::abs(d - std::cos(rho * kPi) * s * s) < 1e-11);
  }
  // Real problems have a real determinant on the real axis.
  const auto g = MatrixProblem::graph(
      PotentialGrid::from_function(3, [](double x) {
        CMatrix q = CMatrix::Zero(3, 3);
        q(0, 0) = std::sin(x);
        q(1, 1) = std::cos(x);
        q(2, 2) = x - kPi / 2;
        return q;
      }),
      0.3);
  for (double lam : {0.4, 5.5, 33.3}) {
    const cplx d = char_det(g, lam);
    CHECK(std::abs(d.imag()) <= 1e-10 * (1 + std::abs(d)));
  }
}

TEST_CASE("Wronskian and Lagrange identities along the mesh") {
  const auto q = PotentialGrid::from_function(3, smooth_q);
  const CMatrix t = make_graph_projector(3);
  const auto p = MatrixProblem::general(q, t, 0.5 * t);
  PropagationOptions rec;
  rec.record = true;
  for (cplx lam : {cplx(2.0, 0.0), cplx(40.0, 0.3), cplx(400.0, -0.1)}) {
    const auto s = propagate_S(p, lam, rec);
    const auto sb = propagate_S(p, std::conj(lam), rec);
    const auto psi = propagate_Psi(p, lam, rec);
    REQUIRE(s.x.size() == psi.x.size());
    const CMatrix l0 = wronskian(sb.Y[0].adjoint(), sb.Yp[0].adjoint(), psi.Y[0], psi.Yp[0]);
    double wmax = 0.0, lmax = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const CMatrix w = wronskian(sb.Y[i].adjoint(), sb.Yp[i].adjoint(), s.Y[i], s.Yp[i]);
      wmax = std::max(wmax, opnorm(w));
      const CMatrix l = wronskian(sb.Y[i].adjoint(), sb.Yp[i].adjoint(), psi.Y[i], psi.Yp[i]);
      lmax = std::max(lmax, opnorm(l - l0));
    }
    CHECK(wmax <= 1e-8 * (1 + std::abs(lam)));
    CHECK(lmax <= 1e-8 * (1 + std::abs(lam)));
  }
}

TEST_CASE("zero-potential exactness up to rho = 30") {
  const auto p = zero_graph(3);
  const CMatrix t = p.T();
  for (double rho = 0.55; rho <= 30.0; rho += 2.37) {
    auto [s, sp] = S_at_pi(p, rho * rho, numeric());
    CHECK(maxabs(s - std::sin(rho * kPi) / rho * CMatrix::Identity(3, 3)) < 1e-9);
    CHECK(maxabs(sp - std::cos(rho * kPi) * CMatrix::Identity(3, 3)) < 1e-9 * rho);
    auto [psi, psip] = Psi_at_zero(p, rho * rho, numeric());
    const CMatrix expect = std::cos(rho * kPi) * t - std::sin(rho * kPi) / rho * p.Tperp();
    CHECK(maxabs(psi - expect) < 1e-9);
  }
}

TEST_CASE("fourth-order mesh refinement") {
  const auto q = PotentialGrid::from_function(3, smooth_q);
  const CMatrix t = make_graph_projector(3);
  const auto p = MatrixProblem::general(q, t, 0.5 * t);
  for (double lam : {1.0, 100.0}) {
    PropagationOptions o;
    o.fixed_steps = 8192;
    auto ref = S_at_pi(p, lam, o).first;
    o.fixed_steps = 64;
    const double e1 = maxabs(S_at_pi(p, lam, o).first - ref);
    o.fixed_steps = 128;
    const double e2 = maxabs(S_at_pi(p, lam, o).first - ref);
    CHECK(e1 / e2 >= 8.0);
  }
}

TEST_CASE("Weyl solution approaches its leading asymptotics") {
  const auto q = PotentialGrid::from_function(3, smooth_q);
  const CMatrix t = make_graph_projector(3);
  const auto p = MatrixProblem::general(q, t, 0.5 * t);
  PropagationOptions rec;
  rec.record = true;
  double cmax_low = 0.0, cmax_high = 0.0;
  for (double rho = 10.25; rho <= 40.0; rho += 1.0) {
    const auto psi = propagate_Psi(p, rho * rho, rec);
    const CMatrix inv0 = psi.Y.front().inverse();
    double err = 0.0;
    for (std::size_t i = 0; i < psi.x.size(); i += 8) {
      const double x = psi.x[i];
      const CMatrix phi = psi.Y[i] * inv0;
      const CMatrix lead = std::cos(rho * (kPi - x)) / std::cos(rho * kPi) * t +
                           std::sin(rho * (kPi - x)) / std::sin(rho * kPi) * p.Tperp();
      err = std::max(err, opnorm(phi - lead));
    }
    (rho < 25 ? cmax_low : cmax_high) = std::max(rho < 25 ? cmax_low : cmax_high, rho * err);
  }
  CHECK(std::isfinite(cmax_low));
  CHECK(cmax_high <= 2.0 * cmax_low + 1.0);
}

TEST_CASE("resolution error for huge lambda") {
  const auto p = MatrixProblem::graph(
      PotentialGrid::from_function(2, [](double x) {
        CMatrix q = CMatrix::Zero(2, 2);
        q(0, 0) = x;
        return q;
      }),
      0.0);
  try {
    S_at_pi(p, 1e12);
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kResolution);
  }
}
