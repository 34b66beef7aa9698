#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "gsturm/forward.hpp"
#include "test_helpers.hpp"

using namespace gsturm;

namespace {

double rel(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

// Bisection for a sign change of f on [a, b].
double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    const double c = 0.5 * (a + b);
    const double fc = f(c);
    if ((fc < 0) == (fa < 0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return 0.5 * (a + b);
}

// Scalar shooting with classical RK4: y'' = (q - lambda) y, y(0) = 0, y'(0) = 1.
// Returns y(pi) and int_0^pi y^2 (Simpson on the RK4 nodes).
struct Shot {
  double y_pi, norm2;
};
Shot shoot(const std::function<double(double)>& q, double lambda, int steps = 20000) {
  const double h = kPi / steps;
  double y = 0.0, yp = 1.0, acc = 0.0;
  auto rhs = [&](double x, double a) { return (q(x) - lambda) * a; };
  for (int i = 0; i < steps; ++i) {
    const double x = i * h;
    const double w = (i == 0) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * y * y;
    const double k1a = yp, k1b = rhs(x, y);
    const double k2a = yp + h / 2 * k1b, k2b = rhs(x + h / 2, y + h / 2 * k1a);
    const double k3a = yp + h / 2 * k2b, k3b = rhs(x + h / 2, y + h / 2 * k2a);
    const double k4a = yp + h * k3b, k4b = rhs(x + h, y + h * k3a);
    y += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    yp += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
  }
  acc += y * y;
  return {y, acc * h / 3};
}

MatrixProblem diagonal_graph(std::mt19937& rng, double h) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a0 = u(rng), a1 = u(rng), a2 = u(rng), b0 = u(rng), b1 = u(rng), b2 = u(rng);
  auto f = [=](double x) {
    CMatrix q = CMatrix::Zero(3, 3);
    q(0, 0) = a0 + b0 * std::cos(x);
    q(1, 1) = a1 * x + b1 * std::sin(2 * x);
    q(2, 2) = a2 + b2 * x * x / 4;
    return q;
  };
  return MatrixProblem::graph(PotentialGrid::from_function(3, f), h);
}

}  // namespace

TEST_CASE("zero-potential graph: eigenvalues at half-integers and doubled integers") {
  set_warnings_muted(true);
  const auto problem = MatrixProblem::graph(PotentialGrid::zero(3), 0.0);
  std::vector<EigenCluster> clusters;
  const auto data = locate_eigenvalues(problem, 3, {}, &clusters);
  const double expected[] = {0.5, 1, 1, 1.5, 2, 2, 2.5, 3, 3};
  REQUIRE(data.entries.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(std::abs(data.entries[i].lambda - expected[i] * expected[i]) < 1e-8);
  }
  for (const auto& c : clusters) {
    const double r = std::sqrt(c.lambda);
    const int mult = std::abs(r - std::round(r)) < 1e-6 ? 2 : 1;
    CHECK(c.multiplicity == mult);
    CHECK(c.kernel_dimension == mult);
  }
}

TEST_CASE("constant shift moves every eigenvalue and keeps weight matrices") {
  set_warnings_muted(true);
  auto f = [](double x) {
    CMatrix q(2, 2);
    q << std::cos(x), 0.3, 0.3, std::sin(x);
    return q;
  };
  const CMatrix t = make_graph_projector(2);
  const auto base = MatrixProblem::general(PotentialGrid::from_function(2, f), t, 0.2 * t);
  const auto d0 = forward_spectral(base, 6);
  const auto d1 = forward_spectral(base.shifted(2.5), 6);
  for (std::size_t i = 0; i < d0.entries.size(); ++i) {
    CHECK(std::abs(d1.entries[i].lambda - d0.entries[i].lambda - 2.5) < 1e-8);
    CHECK(rel(d1.entries[i].alpha, d0.entries[i].alpha) < 1e-6);
  }
}

TEST_CASE("constant coupling decouples into scalar problems in the +/- basis") {
  set_warnings_muted(true);
  const double g = 0.1, hval = 0.4;
  CMatrix c(2, 2);
  c << 0.0, g, g, 0.0;
  const CMatrix t = make_graph_projector(2);
  const auto problem = MatrixProblem::general(PotentialGrid::constant(c), t, hval * t);
  const int N = 6;
  const auto data = locate_eigenvalues(problem, N);

  // + channel: -y'' + g y = lambda y, y'(pi) = h y(pi).
  // - channel: -y'' - g y = lambda y, y(pi) = 0.
  std::vector<double> oracle;
  auto plus = [&](double lam) {
    const auto [s, co] = sine_cosine(cplx(lam - g, 0.0), kPi);
    return (co - hval * s).real();
  };
  auto minus = [&](double lam) { return sine_cosine(cplx(lam + g, 0.0), kPi).first.real(); };
  for (const auto& fn : {std::function<double(double)>(plus), std::function<double(double)>(minus)}) {
    double prev = -3.0;
    double fprev = fn(prev);
    for (double lam = -3.0 + 1e-3; lam < (N + 1.0) * (N + 1.0); lam += 1e-3) {
      const double fl = fn(lam);
      if ((fl < 0) != (fprev < 0)) oracle.push_back(bisect(fn, prev, lam));
      prev = lam;
      fprev = fl;
    }
  }
  std::sort(oracle.begin(), oracle.end());
  for (int i = 0; i < 2 * N; ++i) {
    CHECK(std::abs(data.entries[i].lambda - oracle[i]) < 1e-8);
  }
}

TEST_CASE("zero-potential weight matrices have the closed form") {
  set_warnings_muted(true);
  const auto problem = MatrixProblem::graph(PotentialGrid::zero(3), 0.0);
  const auto data = forward_spectral(problem, 5);
  const CMatrix t = make_graph_projector(3);
  const CMatrix tp = CMatrix::Identity(3, 3) - t;
  for (int n = 1; n <= 5; ++n) {
    const double a = n - 0.5;
    CHECK(rel(data.at(n, 1).alpha, 2 * a * a / kPi * t) < 1e-8);
    CHECK(rel(data.at(n, 2).alpha, 2.0 * n * n / kPi * tp) < 1e-8);
    CHECK(rel(data.at(n, 2).alpha_prime, 2.0 * n * n / kPi * tp) < 1e-8);
    CHECK(data.at(n, 3).alpha_prime.norm() == 0.0);
  }
  CHECK(std::abs(data.at(1, 1).alpha(0, 0).real() - 1.0 / (6.0 * kPi)) < 1e-10);
}

TEST_CASE("scalar Dirichlet weights match the shooting oracle") {
  set_warnings_muted(true);
  const CMatrix zero = CMatrix::Zero(1, 1);
  SUBCASE("q = 0") {
    const auto problem = MatrixProblem::general(PotentialGrid::zero(1), zero, zero);
    const auto data = forward_spectral(problem, 4);
    for (int n = 1; n <= 4; ++n) {
      CHECK(std::abs(data.at(n, 1).lambda - n * n) < 1e-8);
      CHECK(std::abs(data.at(n, 1).alpha(0, 0).real() - 2.0 * n * n / kPi) < 1e-8 * n * n);
    }
  }
  SUBCASE("q = x + cos 3x") {
    auto q = [](double x) { return x + std::cos(3 * x); };
    auto qm = [&](double x) { return CMatrix::Constant(1, 1, q(x)); };
    const auto problem =
        MatrixProblem::general(PotentialGrid::from_function(1, qm), zero, zero);
    const auto data = forward_spectral(problem, 5);
    for (int n = 1; n <= 5; ++n) {
      const double lam = data.at(n, 1).lambda;
      const double root = bisect([&](double l) { return shoot(q, l).y_pi; }, lam - 0.05, lam + 0.05);
      CHECK(std::abs(root - lam) < 1e-8 * (1 + lam));
      const double alpha = 1.0 / shoot(q, root).norm2;
      CHECK(std::abs(data.at(n, 1).alpha(0, 0).real() - alpha) < 1e-8 * alpha);
      const CMatrix oracle = eigenfunction_residue_oracle(problem, lam, 1);
      CHECK(std::abs(oracle(0, 0).real() - alpha) < 1e-6 * alpha);
    }
  }
}

TEST_CASE("eigenfunction oracle reproduces the zero-potential residue") {
  set_warnings_muted(true);
  const auto problem = MatrixProblem::graph(PotentialGrid::zero(3), 0.0);
  const CMatrix t = make_graph_projector(3);
  CHECK(rel(eigenfunction_residue_oracle(problem, 0.25, 1), t / (2 * kPi)) < 1e-8);
  const CMatrix tp = CMatrix::Identity(3, 3) - t;
  CHECK(rel(eigenfunction_residue_oracle(problem, 4.0, 2), 8.0 / kPi * tp) < 1e-8);
}

TEST_CASE("contour residue and eigenfunction oracle agree on random diagonal problems") {
  set_warnings_muted(true);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 2; ++trial) {
    const auto problem = diagonal_graph(rng, trial == 0 ? 0.3 : -0.7);
    std::vector<EigenCluster> clusters;
    const auto data = locate_eigenvalues(problem, 3, {}, &clusters);
    for (const auto& c : clusters) {
      const CMatrix a = compute_weight_matrix(problem, c.lambda, c.multiplicity, c.gap);
      const CMatrix b = eigenfunction_residue_oracle(problem, c.lambda, c.multiplicity);
      CHECK(rel(a, b) < 1e-6);
      CHECK(hermitian_defect(a) <= 1e-8 * opnorm(a));
    }
  }
}

TEST_CASE("weight matrices are Hermitian, nonnegative, of rank equal to the multiplicity") {
  set_warnings_muted(true);
  auto f = [](double x) {
    CMatrix q(3, 3);
    q << std::cos(x), 0.2, cplx(0.1, 0.1 * x), 0.2, std::sin(2 * x), 0.1, cplx(0.1, -0.1 * x),
        0.1, x - 1.5;
    return q;
  };
  // Rank-2 projector I - v v^dagger.
  CVector v(3);
  v << 1.0, cplx(0.0, 1.0), 1.0;
  v.normalize();
  const CMatrix t = CMatrix::Identity(3, 3) - v * v.adjoint();
  CMatrix h = 0.7 * t;
  h(0, 1) += cplx(0.0, 0.2);
  h(1, 0) -= cplx(0.0, 0.2);
  h = t * h * t;
  const auto problem = MatrixProblem::general(PotentialGrid::from_function(3, f), t, h);
  const auto data = forward_spectral(problem, 6);
  for (const auto& g : multiplicity_groups(data)) {
    const CMatrix& a = data.entries[g.front()].alpha;
    CHECK(hermitian_defect(a) <= 1e-8 * opnorm(a));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
    CHECK(es.eigenvalues()(0) >= -1e-10 * opnorm(a));
    const int rank = static_cast<int>((es.eigenvalues().array() > 1e-6 * opnorm(a)).count());
    if (g.back() + 1 < data.entries.size()) CHECK(rank == static_cast<int>(g.size()));
  }
  for (int n = 1; n <= 6; ++n) {
    // Two eigenvalues near n - 1/2 and one near n.
    if (n > 3) {
      CHECK(std::abs(std::sqrt(data.at(n, 1).lambda) - (n - 0.5)) < 0.45);
      CHECK(std::abs(std::sqrt(data.at(n, 2).lambda) - (n - 0.5)) < 0.45);
      CHECK(std::abs(std::sqrt(data.at(n, 3).lambda) - n) < 0.45);
    }
  }
}

TEST_CASE("counting function is monotone and agrees with the located eigenvalues") {
  set_warnings_muted(true);
  std::mt19937 rng(3);
  const auto problem = diagonal_graph(rng, 0.5);
  const auto data = locate_eigenvalues(problem, 4);
  EigenvalueCounter counter(problem, PropagationOptions{});
  int prev = 0;
  for (const auto& g : multiplicity_groups(data)) {
    const double lam = data.entries[g.front()].lambda;
    const int below = counter.count(lam - 1e-5 * (1 + std::abs(lam)));
    const int above = counter.count(lam + 1e-5 * (1 + std::abs(lam)));
    CHECK(below == static_cast<int>(g.front()));
    CHECK(above == static_cast<int>(g.back() + 1));
    CHECK(below >= prev);
    prev = above;
  }
}

TEST_CASE("dedup keeps the head of every multiplicity group") {
  SpectralDataSet d;
  d.m = 3;
  d.N = 2;
  const CMatrix a = CMatrix::Identity(3, 3);
  const double lams[] = {1.0, 2.0, 3.0, 3.0, 3.0, 5.0};
  for (int i = 0; i < 6; ++i) d.entries.push_back({i / 3 + 1, i % 3 + 1, lams[i], (i + 1) * a, {}});
  SUBCASE("simple eigenvalues") {
    d.entries[3].lambda = 3.5;
    d.entries[4].lambda = 4.0;
    const auto out = dedup_alpha(d);
    for (const auto& e : out.entries) CHECK((e.alpha_prime - e.alpha).norm() == 0.0);
  }
  SUBCASE("double and triple groups") {
    d.entries[1].lambda = 1.0;  // (1, 2) doubles (1, 1)
    d.entries[1].alpha = d.entries[0].alpha;
    d.entries[3].alpha = d.entries[2].alpha;
    d.entries[4].alpha = d.entries[2].alpha;
    const auto out = dedup_alpha(d);
    CHECK((out.entries[0].alpha_prime - out.entries[0].alpha).norm() == 0.0);
    CHECK(out.entries[1].alpha_prime.norm() == 0.0);
    CHECK((out.entries[2].alpha_prime - out.entries[2].alpha).norm() == 0.0);
    CHECK(out.entries[3].alpha_prime.norm() == 0.0);
    CHECK(out.entries[4].alpha_prime.norm() == 0.0);
    CHECK((out.entries[5].alpha_prime - out.entries[5].alpha).norm() == 0.0);
  }
  SUBCASE("equal eigenvalues with unequal weights") {
    try {
      dedup_alpha(d);
      FAIL("expected an SD violation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSdViolation);
    }
  }
}
