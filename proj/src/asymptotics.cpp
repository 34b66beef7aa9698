#include "gsturm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "gsturm/linalg.hpp"

namespace gsturm {

namespace {

bool same_z(double a, double b) { return std::abs(a - b) <= kMultipleRootTol * (1.0 + std::abs(a)); }

// Indices k (0-based) in the same block as s with z_k = z_s.
std::vector<int> cluster_of(const RVector& z, int p, int s) {
  const int lo = s < p ? 0 : p;
  const int hi = s < p ? p : static_cast<int>(z.size());
  std::vector<int> out;
  for (int k = lo; k < hi; ++k) {
    if (same_z(z(k), z(s))) out.push_back(k);
  }
  return out;
}

// First index of every distinct cluster.
std::vector<int> cluster_heads(const RVector& z, int p) {
  std::vector<int> heads;
  for (int s = 0; s < z.size(); ++s) {
    if (cluster_of(z, p, s).front() == s) heads.push_back(s);
  }
  return heads;
}

double tail_start(int N) { return std::max(1, N / 2); }

// Eigen-decomposition of a Hermitian matrix.
Eigen::SelfAdjointEigenSolver<CMatrix> eig(const CMatrix& a) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(a));
}

// Projector onto the span of the top r eigenvectors.
CMatrix top_projector(const CMatrix& a, int r) {
  const CMatrix v = eig(a).eigenvectors().rightCols(r);
  return v * v.adjoint();
}

// Eigenvalues of Theta on Ran P with values within tol snapped to their mean,
// and Theta rebuilt from the snapped decomposition.
CMatrix snap_block(const CMatrix& theta, const CMatrix& p, double tol) {
  const CMatrix b = range_basis(p);
  if (b.cols() == 0) return CMatrix::Zero(theta.rows(), theta.cols());
  const auto es = eig(b.adjoint() * theta * b);
  RVector v = es.eigenvalues();
  int i = 0;
  while (i < v.size()) {
    int j = i + 1;
    while (j < v.size() && v(j) - v(j - 1) <= tol * (1.0 + std::abs(v(j)))) ++j;
    const double mean = v.segment(i, j - i).mean();
    v.segment(i, j - i).setConstant(mean);
    i = j;
  }
  const CMatrix u = b * es.eigenvectors();
  return u * v.cast<cplx>().asDiagonal() * u.adjoint();
}

std::string index_string(const std::vector<std::pair<int, int>>& offenders) {
  std::ostringstream os;
  for (std::size_t i = 0; i < offenders.size() && i < 8; ++i) {
    os << (i ? ", " : "") << "(" << offenders[i].first << ", " << offenders[i].second << ")";
  }
  if (offenders.size() > 8) os << ", ...";
  return os.str();
}

CheckResult make_check(std::string name, std::vector<std::pair<int, int>> offenders,
                       double value, const std::string& what) {
  CheckResult r;
  r.name = std::move(name);
  r.pass = offenders.empty();
  r.value = value;
  r.detail = r.pass ? what : what + "; offending (n, k): " + index_string(offenders);
  r.offenders = std::move(offenders);
  return r;
}

CheckResult make_check(std::string name, bool pass, double value, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.pass = pass;
  r.value = value;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

double asymptotic_center(int n, int k, int p) { return k <= p ? n - 0.5 : static_cast<double>(n); }

double signed_root(double lambda) {
  return lambda >= 0.0 ? std::sqrt(lambda) : -std::sqrt(-lambda);
}

AsymptoticCoefficients general_coefficients(const CMatrix& t, const CMatrix& theta) {
  const int m = static_cast<int>(t.rows());
  AsymptoticCoefficients c;
  c.kind = ProblemKind::kGeneral;
  c.m = m;
  c.p = projector_rank(t);
  c.T = t;
  c.Tperp = CMatrix::Identity(m, m) - t;
  c.Theta = hermitian_part(theta);
  c.z.resize(m);
  c.z.head(c.p) = compressed_eigenvalues(c.Theta, c.T);
  c.z.tail(m - c.p) = compressed_eigenvalues(c.Theta, c.Tperp);
  c.A = A_matrices_general(c.Theta, c.T, c.z);
  return c;
}

AsymptoticCoefficients graph_coefficients(const RVector& omega, double z1) {
  const int m = static_cast<int>(omega.size());
  AsymptoticCoefficients c;
  c.kind = ProblemKind::kGraph;
  c.m = m;
  c.p = 1;
  c.T = make_graph_projector(m);
  c.Tperp = CMatrix::Identity(m, m) - c.T;
  c.omega = omega;
  const CMatrix om = omega.cast<cplx>().asDiagonal();
  const double h = omega.mean() - z1;
  c.Omega = om;
  c.H = h * c.T;
  c.Theta = theta_matrix(om, *c.H, c.T);
  c.z.resize(m);
  c.z(0) = z1;
  c.z.tail(m - 1) = graph_P2_roots(omega);
  c.A = A_matrices_graph(omega, c.z);
  return c;
}

AsymptoticCoefficients coefficients_from_problem(const MatrixProblem& problem) {
  problem.require_regular();
  if (problem.kind() == ProblemKind::kGraph) {
    const RVector omega = problem.Omega().diagonal().real();
    const double z1 = omega.mean() - problem.graph_h();
    return graph_coefficients(omega, z1);
  }
  const CMatrix theta = theta_matrix(problem.Omega(), problem.H(), problem.T());
  AsymptoticCoefficients c = general_coefficients(problem.T(), theta);
  c.z.head(c.p) = roots_P1(problem.Omega(), problem.H(), problem.T());
  c.z.tail(c.m - c.p) = roots_P2(problem.Omega(), problem.H(), problem.T());
  c.Omega = problem.Omega();
  c.H = problem.H();
  return c;
}

ResidualReport residuals(const SpectralDataSet& data, const AsymptoticCoefficients& coeffs) {
  const int m = data.m;
  const int N = data.N;
  const int p = coeffs.p;
  ResidualReport r;
  r.N = N;
  r.kappa.assign(N, std::vector<double>(m, 0.0));
  r.K_I.assign(N, 0.0);
  r.K_II.assign(N, 0.0);
  r.K_s.assign(m, std::vector<double>(N, 0.0));
  r.alpha_I_deviation.assign(N, 0.0);
  r.alpha_II_deviation.assign(N, 0.0);
  r.kappa_partial_l2.assign(N, 0.0);

  double acc = 0.0;
  const int n_tail = static_cast<int>(tail_start(N));
  const bool have_alpha = !data.entries.empty() && data.entries.front().alpha_prime.size() > 0;
  for (int n = 1; n <= N; ++n) {
    for (int k = 1; k <= m; ++k) {
      const double rho = signed_root(data.at(n, k).lambda);
      const double kap =
          n * (rho - asymptotic_center(n, k, p) - coeffs.z(k - 1) / (kPi * n));
      r.kappa[n - 1][k - 1] = kap;
      acc += kap * kap;
      if (n >= n_tail) r.kappa_tail_max = std::max(r.kappa_tail_max, std::abs(kap));
    }
    r.kappa_partial_l2[n - 1] = std::sqrt(acc);
    if (!have_alpha) continue;

    const double cI = 2.0 * (n - 0.5) * (n - 0.5) / kPi;
    const double cII = 2.0 * n * n / kPi;
    CMatrix aI = CMatrix::Zero(m, m), aII = CMatrix::Zero(m, m);
    for (int k = 1; k <= m; ++k) (k <= p ? aI : aII) += data.at(n, k).alpha_prime;
    const CMatrix KI = n * (aI / cI - coeffs.T);
    const CMatrix KII = n * (aII / cII - coeffs.Tperp);
    r.K_I[n - 1] = opnorm(KI);
    r.K_II[n - 1] = opnorm(KII);
    r.alpha_I_deviation[n - 1] = opnorm(aI / cI - coeffs.T);
    r.alpha_II_deviation[n - 1] = opnorm(aII / cII - coeffs.Tperp);
    for (int s = 0; s < m; ++s) {
      CMatrix as = CMatrix::Zero(m, m);
      for (int k : cluster_of(coeffs.z, p, s)) as += data.at(n, k + 1).alpha_prime;
      const double cs = s < p ? cI : cII;
      r.K_s[s][n - 1] = opnorm(as / cs - coeffs.A[s]);
      if (n >= n_tail) r.K_tail_max = std::max(r.K_tail_max, r.K_s[s][n - 1]);
    }
    if (n >= n_tail) {
      r.alpha_tail_deviation = std::max(
          {r.alpha_tail_deviation, r.alpha_I_deviation[n - 1], r.alpha_II_deviation[n - 1]});
    }
  }
  r.z_fit = fit_z(data, p);
  return r;
}

RVector fit_z(const SpectralDataSet& data, int p) {
  const int m = data.m;
  const int N = data.N;
  const int n0 = static_cast<int>(tail_start(N));
  const int rows = N - n0 + 1;
  RVector z(m);
  for (int k = 1; k <= m; ++k) {
    if (rows < 3) {
      const double rho = signed_root(data.at(N, k).lambda);
      z(k - 1) = kPi * N * (rho - asymptotic_center(N, k, p));
      continue;
    }
    // The 1/n column absorbs z/(2n) from expanding around n - 1/2.
    RMatrix a(rows, 3);
    RVector b(rows);
    for (int n = n0; n <= N; ++n) {
      const double rho = signed_root(data.at(n, k).lambda);
      a(n - n0, 0) = 1.0;
      a(n - n0, 1) = 1.0 / n;
      a(n - n0, 2) = 1.0 / (static_cast<double>(n) * n);
      b(n - n0) = kPi * n * (rho - asymptotic_center(n, k, p));
    }
    z(k - 1) = a.colPivHouseholderQr().solve(b)(0);
  }
  return z;
}

AsymptoticCoefficients fit_coefficients(const SpectralDataSet& data, ProblemKind kind) {
  const int m = data.m;
  const int N = data.N;
  const int n0 = static_cast<int>(tail_start(N));

  // p: number of eigenvalues in the top row that sit nearer n - 1/2 than n.
  int p = 0;
  for (int k = 1; k <= m; ++k) {
    const double rho = signed_root(data.at(N, k).lambda);
    if (std::abs(rho - (N - 0.5)) < std::abs(rho - N)) ++p;
  }
  if (kind == ProblemKind::kGraph) p = 1;
  if (p < 1 || p > m - 1) {
    throw Error(ErrorCode::kInconsistentCoefficients,
                "cannot infer rank(T) in [1, m-1] from the eigenvalue tail");
  }

  // T: top-p eigenprojector of the tail average of the normalized alpha^I.
  CMatrix t;
  if (kind == ProblemKind::kGraph) {
    t = make_graph_projector(m);
  } else {
    CMatrix avg = CMatrix::Zero(m, m);
    for (int n = n0; n <= N; ++n) {
      CMatrix aI = CMatrix::Zero(m, m);
      for (int k = 1; k <= p; ++k) aI += data.at(n, k).alpha_prime;
      avg += aI * (kPi / (2.0 * (n - 0.5) * (n - 0.5)));
    }
    t = top_projector(avg, p);
  }
  const CMatrix tp = CMatrix::Identity(m, m) - t;

  // Theta: tail average of sum_k z_k alpha'_nk (normalized), compressed per block.
  const RVector z = fit_z(data, p);
  CMatrix th_I = CMatrix::Zero(m, m), th_II = CMatrix::Zero(m, m);
  for (int n = n0; n <= N; ++n) {
    const double cI = 2.0 * (n - 0.5) * (n - 0.5) / kPi;
    const double cII = 2.0 * n * n / kPi;
    for (int k = 1; k <= m; ++k) {
      const CMatrix& a = data.at(n, k).alpha_prime;
      if (k <= p) {
        th_I += z(k - 1) * a / cI;
      } else {
        th_II += z(k - 1) * a / cII;
      }
    }
  }
  const double count = N - n0 + 1;
  th_I = t * th_I * t / count;
  th_II = tp * th_II * tp / count;
  const double snap = 1e-6;
  CMatrix theta = snap_block(th_I, t, snap) + snap_block(th_II, tp, snap);

  if (kind == ProblemKind::kGraph) {
    // omega by least squares: Tperp diag(omega) Tperp ~ Tperp Theta Tperp.
    Eigen::MatrixXd lhs(2 * m * m, m);
    Eigen::VectorXd rhs(2 * m * m);
    for (int j = 0; j < m; ++j) {
      CMatrix e = CMatrix::Zero(m, m);
      e(j, j) = 1.0;
      const CMatrix col = tp * e * tp;
      for (int r = 0; r < m * m; ++r) {
        lhs(r, j) = col(r % m, r / m).real();
        lhs(m * m + r, j) = col(r % m, r / m).imag();
      }
    }
    for (int r = 0; r < m * m; ++r) {
      rhs(r) = th_II(r % m, r / m).real();
      rhs(m * m + r) = th_II(r % m, r / m).imag();
    }
    const RVector omega = lhs.completeOrthogonalDecomposition().solve(rhs);
    const double z1 = compressed_eigenvalues(theta, t)(0);
    return graph_coefficients(omega, z1);
  }
  return general_coefficients(t, theta);
}

std::vector<CheckResult> check_SD(const SpectralDataSet& data) {
  std::vector<CheckResult> out;
  const int m = data.m;

  std::vector<std::pair<int, int>> nonfinite, nonherm, negative, unequal, rank_bad, order_bad;
  double worst_herm = 0.0, worst_neg = 0.0;
  for (std::size_t i = 0; i < data.entries.size(); ++i) {
    const auto& e = data.entries[i];
    const std::pair<int, int> nk{e.n, e.k};
    if (!std::isfinite(e.lambda) || !e.alpha.allFinite() || e.alpha.rows() != m ||
        e.alpha.cols() != m) {
      nonfinite.push_back(nk);
      continue;
    }
    const double norm = opnorm(e.alpha);
    const double herm = hermitian_defect(e.alpha);
    worst_herm = std::max(worst_herm, herm / std::max(norm, 1e-300));
    if (herm > 1e-8 * norm) nonherm.push_back(nk);
    const double mu = eig(e.alpha).eigenvalues()(0);
    if (mu < -1e-10 * norm) {
      negative.push_back(nk);
      worst_neg = std::min(worst_neg, mu);
    }
    const int expect_n = static_cast<int>(i) / m + 1;
    const int expect_k = static_cast<int>(i) % m + 1;
    if (e.n != expect_n || e.k != expect_k ||
        (i > 0 && e.lambda < data.entries[i - 1].lambda)) {
      order_bad.push_back(nk);
    }
  }
  out.push_back(make_check("finite_real", nonfinite, 0.0, "eigenvalues real and finite"));
  out.push_back(make_check("hermitian", nonherm, worst_herm, "alpha Hermitian within 1e-8"));
  out.push_back(make_check("nonnegative", negative, worst_neg,
                           "alpha positive semidefinite (min eigenvalue >= -1e-10 ||alpha||)"));
  if (!nonfinite.empty()) return out;

  const auto groups = multiplicity_groups(data);
  for (const auto& g : groups) {
    const CMatrix& head = data.entries[g.front()].alpha;
    const double norm = std::max(opnorm(head), 1e-300);
    for (std::size_t j = 1; j < g.size(); ++j) {
      if (opnorm(data.entries[g[j]].alpha - head) > 1e-8 * norm) {
        unequal.push_back({data.entries[g[j]].n, data.entries[g[j]].k});
      }
    }
    const auto ev = eig(head).eigenvalues();
    const double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    const int rank = static_cast<int>((ev.array() > 1e-6 * top).count());
    const int mult = static_cast<int>(g.size());
    // A group touching the end of the table may continue beyond N.
    const bool truncated = g.back() + 1 == data.entries.size();
    if (truncated ? rank < mult : rank != mult) {
      rank_bad.push_back({data.entries[g.front()].n, data.entries[g.front()].k});
    }
  }
  out.push_back(make_check("equal_lambda_equal_alpha", unequal, 0.0,
                           "equal eigenvalues carry equal weight matrices (1e-8)"));
  out.push_back(make_check("rank_multiplicity", rank_bad, 0.0,
                           "rank(alpha) equals the multiplicity of lambda"));
  out.push_back(make_check("numbering", order_bad, 0.0,
                           "(n, k) numbering with nondecreasing lambda"));
  return out;
}

std::vector<CheckResult> check_coefficient_conditions(const AsymptoticCoefficients& c, double tol) {
  std::vector<CheckResult> out;
  const int m = c.m;
  const int p = c.p;
  const auto heads = cluster_heads(c.z, p);

  double proj = 0.0;
  for (const auto& a : c.A) {
    proj = std::max({proj, opnorm(a * a - a), hermitian_defect(a)});
  }
  out.push_back(make_check("coeff_projectors", proj <= tol, proj,
                           "A^(s) orthogonal projectors"));

  CMatrix sum_t = CMatrix::Zero(m, m), sum_tp = CMatrix::Zero(m, m);
  for (int s : heads) (s < p ? sum_t : sum_tp) += c.A[s];
  const double dt = opnorm(sum_t - c.T), dtp = opnorm(sum_tp - c.Tperp);
  out.push_back(make_check("coeff_sum_T", dt <= tol, dt,
                           "sum of A^(s) over distinct z_s, s <= p, equals T"));
  out.push_back(make_check("coeff_sum_Tperp", dtp <= tol, dtp,
                           "sum of A^(s) over distinct z_s, s > p, equals Tperp"));

  double rank_err = 0.0;
  for (int s = 0; s < m; ++s) {
    const double tr = c.A[s].trace().real();
    rank_err = std::max(rank_err, std::abs(tr - static_cast<double>(cluster_of(c.z, p, s).size())));
  }
  out.push_back(make_check("coeff_rank", rank_err <= 1e-6, rank_err,
                           "rank A^(s) = #{k in the block of s : z_k = z_s}"));

  double orth = 0.0;
  for (int s = 0; s < m; ++s) {
    for (int k = 0; k < m; ++k) {
      const bool cross = (s < p) != (k < p);
      if (cross || !same_z(c.z(s), c.z(k))) orth = std::max(orth, opnorm(c.A[s] * c.A[k]));
    }
  }
  out.push_back(make_check("coeff_orthogonality", orth <= tol, orth,
                           "A^(s) A^(k) = 0 across blocks and distinct z"));

  bool ordered = true;
  for (int k = 0; k + 1 < m; ++k) {
    if (k + 1 == p) continue;
    if (c.z(k) > c.z(k + 1) + tol) ordered = false;
  }
  out.push_back(make_check("coeff_ordering", ordered, 0.0,
                           "z_k <= z_{k+1} within each block"));

  if (c.kind == ProblemKind::kGraph && c.omega) {
    const double dT = opnorm(c.T - make_graph_projector(m));
    out.push_back(make_check("graph_projector", p == 1 && dT <= tol, dT,
                             "p = 1 and T = ones/m"));
    const RVector roots = graph_P2_roots(*c.omega);
    const double dz = (roots - c.z.tail(m - 1)).cwiseAbs().maxCoeff();
    out.push_back(make_check("graph_P2_roots", dz <= tol * (1.0 + roots.cwiseAbs().maxCoeff()),
                             dz, "z_2..z_m are the roots of P2"));
    // Residue formula versus spectral projectors of Theta.
    double da = opnorm(c.A[0] - c.T);
    bool distinct = true;
    for (int s = 1; s + 1 < m; ++s) distinct = distinct && !same_z(c.z(s), c.z(s + 1));
    if (distinct) {
      const auto general = A_matrices_general(c.Theta, c.T, c.z);
      for (int s = 0; s < m; ++s) da = std::max(da, opnorm(c.A[s] - general[s]));
      for (int s = 1; s < m; ++s) {
        const CMatrix res = graph_A_of_z(*c.omega, c.z(s)) /
                            (m * graph_P2_derivative(*c.omega, c.z(s)));
        da = std::max(da, opnorm(c.A[s] - res));
      }
    }
    out.push_back(make_check("graph_residue_formula", da <= tol, da,
                             distinct ? "A^(s) match the residue formula"
                                      : "A^(1) = T (multiple P2 roots: residue formula skipped)"));
  }
  return out;
}

std::vector<CheckResult> check_asymptotics(const ResidualReport& r) {
  std::vector<CheckResult> out;
  std::ostringstream k;
  k << "max |kappa_nk| over n in [N/2, N] = " << r.kappa_tail_max << " (bound 0.5)";
  out.push_back(make_check("asymptotics_kappa",
                           std::isfinite(r.kappa_tail_max) && r.kappa_tail_max <= 0.5,
                           r.kappa_tail_max, k.str()));
  std::ostringstream a;
  a << "max deviation of normalized alpha^I, alpha^II from T, Tperp over n in [N/2, N] = "
    << r.alpha_tail_deviation << " (bound 0.1)";
  out.push_back(make_check("asymptotics_alpha",
                           std::isfinite(r.alpha_tail_deviation) && r.alpha_tail_deviation <= 0.1,
                           r.alpha_tail_deviation, a.str()));
  std::ostringstream s;
  s << "max ||K_n|| of the alpha^(s) relations over n in [N/2, N] = " << r.K_tail_max
    << " (bound 0.25)";
  out.push_back(make_check("asymptotics_K", std::isfinite(r.K_tail_max) && r.K_tail_max <= 0.25,
                           r.K_tail_max, s.str()));
  return out;
}

std::vector<CVector> completeness_vectors(const SpectralDataSet& data) {
  std::vector<CVector> out(data.entries.size());
  for (const auto& g : multiplicity_groups(data)) {
    const CMatrix& a = data.entries[g.front()].alpha;
    const auto es = eig(a);
    const int m = data.m;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const int col = m - 1 - static_cast<int>(j % static_cast<std::size_t>(m));
      CVector v = es.eigenvectors().col(col);
      Eigen::Index imax = 0;
      v.cwiseAbs().maxCoeff(&imax);
      v *= std::abs(v(imax)) / v(imax);
      out[g[j]] = v;
    }
  }
  return out;
}

SurrogateReport completeness_surrogate(const SpectralDataSet& data, int mesh_t, double threshold) {
  SurrogateReport rep;
  rep.mesh_t = mesh_t;
  rep.threshold = threshold;
  const auto vecs = completeness_vectors(data);
  const int count = static_cast<int>(vecs.size());
  const int m = data.m;
  rep.size = count;
  if (count == 0 || mesh_t < 2) return rep;

  // Columns: samples of E_nk sin(rho t)/rho with trapezoid weights folded in.
  const double dt = kPi / (mesh_t - 1);
  CMatrix f(static_cast<Eigen::Index>(mesh_t) * m, count);
  for (int c = 0; c < count; ++c) {
    const double lam = data.entries[c].lambda;
    for (int i = 0; i < mesh_t; ++i) {
      const double t = i * dt;
      const double w = std::sqrt((i == 0 || i == mesh_t - 1 ? 0.5 : 1.0) * dt);
      const cplx s = sine_cosine(cplx(lam, 0.0), t).first;
      f.block(static_cast<Eigen::Index>(i) * m, c, m, 1) = w * s * vecs[c];
    }
  }
  const CMatrix gram = f.adjoint() * f;
  const RVector sv = Eigen::JacobiSVD<CMatrix>(gram).singularValues();
  rep.smallest_singular_value = sv(sv.size() - 1);
  rep.pass = rep.smallest_singular_value > threshold;
  return rep;
}

}  // namespace gsturm
