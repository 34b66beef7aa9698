#include "gsturm/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gsturm/asymptotics.hpp"
#include "gsturm/parallel.hpp"

namespace gsturm {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double spectrum_lower_bound(const MatrixProblem& problem) {
  double qmin = std::numeric_limits<double>::infinity();
  for (const auto& v : problem.Q().values()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(v), Eigen::EigenvaluesOnly);
    qmin = std::min(qmin, es.eigenvalues()(0));
  }
  const double hn = opnorm(problem.H());
  return qmin - hn * hn - 1.0;
}

double potential_bound(const MatrixProblem& problem) {
  double q = 0.0;
  for (const auto& v : problem.Q().values()) q = std::max(q, opnorm(v));
  return q;
}

// Phase in [0, 2 pi).
double phase_0_2pi(cplx w) {
  double a = std::arg(w);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

CMatrix cayley(const CMatrix& y, const CMatrix& yp, double s) {
  const cplx i(0.0, 1.0);
  const CMatrix a = yp + (i * s) * y;
  const CMatrix b = yp - (i * s) * y;
  // Z = A B^{-1}  <=>  Z^T = B^{-T} A^T
  return Eigen::PartialPivLU<CMatrix>(b.transpose()).solve(a.transpose()).transpose();
}

}  // namespace

EigenvalueCounter::EigenvalueCounter(const MatrixProblem& problem,
                                     const PropagationOptions& opts)
    : problem_(problem),
      opts_(opts),
      lo_(spectrum_lower_bound(problem)),
      qnorm_(potential_bound(problem)) {
  opts_.record = false;
}

double EigenvalueCounter::scale_for(double lambda) {
  const double s = std::sqrt(std::max(1.0, std::abs(lambda)));
  return std::exp2(std::floor(std::log2(s)));
}

CMatrix EigenvalueCounter::boundary_cayley(double s) const {
  const CMatrix bc = problem_.Tperp() + problem_.H() * problem_.T();
  return cayley(problem_.T(), bc, s);
}

long EigenvalueCounter::winding_index(double lambda, double s) const {
  const int m = problem_.dim();
  const CMatrix ub_adj = boundary_cayley(s).adjoint();
  // Each eigenphase of Z moves at most 2 max(s, ||lambda - Q|| / s) per unit x;
  // keep the total per step below pi/4.
  const double speed = 2.0 * std::max(s, (std::abs(lambda) + qnorm_) / s);
  int n = std::max(opts_.base_steps, required_steps(cplx(lambda, 0.0), opts_));
  while (kPi / n * speed * m > 0.25 * kPi) n *= 2;
  for (;; n *= 2) {
    if (n > opts_.max_steps) {
      std::ostringstream os;
      os << "oscillation count at lambda = " << lambda << " needs more than "
         << opts_.max_steps << " steps";
      throw Error(ErrorCode::kResolution, os.str());
    }
    PropagationOptions o = opts_;
    o.fixed_steps = n;
    double total = 0.0;
    cplx prev_det(0.0, 0.0);
    bool ok = true;
    CMatrix z_last;
    visit_S_frames(problem_, cplx(lambda, 0.0), o,
                   [&](double x, const CMatrix& y, const CMatrix& yp) {
                     if (!ok) return;
                     const CMatrix z = ub_adj * cayley(y, yp, s);
                     const cplx det = z.determinant();
                     if (x == 0.0) {
                       Eigen::ComplexEigenSolver<CMatrix> es(z, false);
                       for (Eigen::Index j = 0; j < m; ++j) {
                         total += phase_0_2pi(es.eigenvalues()(j));
                       }
                     } else {
                       const double d = std::arg(det / prev_det);
                       if (std::abs(d) > 0.5 * kPi) ok = false;
                       total += d;
                     }
                     prev_det = det;
                     if (x == kPi) z_last = z;
                   });
    if (!ok) continue;
    Eigen::ComplexEigenSolver<CMatrix> es(z_last, false);
    double end = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) end += phase_0_2pi(es.eigenvalues()(j));
    const double k = (total - end) / kTwoPi;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-6) {
      std::ostringstream os;
      os << "oscillation count at lambda = " << lambda << " is not an integer (" << k << ")";
      throw Error(ErrorCode::kResolution, os.str());
    }
    return static_cast<long>(r);
  }
}

int EigenvalueCounter::count(double lambda) const {
  if (lambda <= lo_) return 0;
  const double s = scale_for(lambda);
  long base;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = base_index_.find(s);
    if (it == base_index_.end()) it = base_index_.emplace(s, winding_index(lo_, s)).first;
    base = it->second;
  }
  const long c = winding_index(lambda, s) - base;
  if (c < 0) {
    std::ostringstream os;
    os << "negative eigenvalue count at lambda = " << lambda;
    throw Error(ErrorCode::kResolution, os.str());
  }
  return static_cast<int>(c);
}

double EigenvalueCounter::crossing(double lambda, double s) const {
  auto [y, yp] = S_at_pi(problem_, cplx(lambda, 0.0), opts_);
  const CMatrix z = boundary_cayley(s).adjoint() * cayley(y, yp, s);
  Eigen::ComplexEigenSolver<CMatrix> es(z, false);
  double best = kPi;
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    const double f = std::arg(es.eigenvalues()(j));
    if (std::abs(f) < std::abs(best)) best = f;
  }
  return best;
}

std::vector<EigenvalueCounter::Bracket> EigenvalueCounter::scan(int target) const {
  std::vector<Bracket> brackets;
  double a = lo_;
  int ca = 0;
  while (ca < target) {
    // Cells of 0.1 in rho units (d lambda = 2 rho d rho), finer near zero.
    const double step = 0.2 * std::sqrt(std::max(0.25, std::abs(a)));
    const double b = a + step;
    const int cb = count(b);
    if (cb > ca) brackets.push_back({a, b, cb - ca});
    a = b;
    ca = cb;
  }
  return brackets;
}

namespace {

// Brent's method on [a, b] with fa < 0 < fb.
template <class F>
double brent(F f, double a, double b, double fa, double fb, double xtol) {
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 100; ++iter) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2e-16 * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = d;
      }
    } else {
      d = m;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
    fb = f(b);
  }
  return b;
}

struct Isolator {
  const EigenvalueCounter& counter;
  double merge_tol;
  std::vector<EigenCluster> out;

  void run(double a, double b, int ca, int cb) {
    const int r = cb - ca;
    if (r <= 0) return;
    const double width_stop = 1e-6 * (1.0 + std::abs(a));
    while (b - a > width_stop) {
      const double mid = 0.5 * (a + b);
      const int cm = counter.count(mid);
      if (cm > ca && cm < cb) {
        run(a, mid, ca, cm);
        run(mid, b, cm, cb);
        return;
      }
      if (cm == ca) {
        a = mid;
      } else {
        b = mid;
      }
    }
    // Narrow bracket containing r eigenvalues: locate the phase crossing.
    const double scale = EigenvalueCounter::scale_for(b);
    auto f = [&](double x) { return counter.crossing(x, scale); };
    double fa = f(a), fb = f(b);
    double root;
    if (fa < 0 && fb > 0) {
      root = brent(f, a, b, fa, fb, 1e-15 * (1.0 + std::abs(a)));
    } else {
      root = 0.5 * (a + b);
    }
    const double delta = 0.5 * merge_tol * (1.0 + std::abs(root));
    const int lo = counter.count(std::max(a, root - delta));
    const int hi = counter.count(std::min(b, root + delta));
    if (lo == ca && hi == cb) {
      out.push_back({root, r, 0, 0.0});
      return;
    }
    // Distinct eigenvalues closer than 1e-6: split by bisection on the count.
    while (b - a > merge_tol * (1.0 + std::abs(a))) {
      const double mid = 0.5 * (a + b);
      const int cm = counter.count(mid);
      if (cm > ca && cm < cb) {
        run(a, mid, ca, cm);
        run(mid, b, cm, cb);
        return;
      }
      if (cm == ca) {
        a = mid;
      } else {
        b = mid;
      }
    }
    out.push_back({0.5 * (a + b), r, 0, 0.0});
  }
};

int kernel_dimension(const MatrixProblem& problem, double lambda, double rank_tol,
                     const PropagationOptions& opts) {
  auto [y, yp] = Psi_at_zero(problem, cplx(lambda, 0.0), opts);
  Eigen::JacobiSVD<CMatrix> svd(y);
  const auto& sv = svd.singularValues();
  // Psi(0) and Psi'(0)/rho have comparable size away from eigenvalues; the
  // second is the reference when every singular value of Psi(0) is small.
  const double rho = std::sqrt(std::max(1.0, std::abs(lambda)));
  const double ref = std::max(sv(0), opnorm(yp) / rho);
  int k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < rank_tol * ref) ++k;
  }
  return k;
}

std::vector<EigenCluster> find_clusters(const MatrixProblem& problem, int target,
                                        const ForwardOptions& opts) {
  EigenvalueCounter counter(problem, opts.propagation);
  const auto brackets = counter.scan(target);
  Isolator iso{counter, opts.merge_tol, {}};
  int before = 0;
  for (const auto& br : brackets) {
    iso.run(br.a, br.b, before, before + br.count);
    before += br.count;
  }
  auto clusters = std::move(iso.out);
  std::sort(clusters.begin(), clusters.end(),
            [](const EigenCluster& x, const EigenCluster& y) { return x.lambda < y.lambda; });
  // Merge clusters that coincide within the tolerance.
  std::vector<EigenCluster> merged;
  for (const auto& c : clusters) {
    if (!merged.empty() &&
        std::abs(c.lambda - merged.back().lambda) <=
            opts.merge_tol * (1.0 + std::abs(c.lambda))) {
      auto& b = merged.back();
      b.lambda = (b.lambda * b.multiplicity + c.lambda * c.multiplicity) /
                 (b.multiplicity + c.multiplicity);
      b.multiplicity += c.multiplicity;
    } else {
      merged.push_back(c);
    }
  }
  for (std::size_t i = 0; i < merged.size(); ++i) {
    double gap = std::numeric_limits<double>::infinity();
    if (i > 0) gap = std::min(gap, merged[i].lambda - merged[i - 1].lambda);
    if (i + 1 < merged.size()) gap = std::min(gap, merged[i + 1].lambda - merged[i].lambda);
    merged[i].gap = gap;
    merged[i].kernel_dimension =
        kernel_dimension(problem, merged[i].lambda, opts.rank_tol, opts.propagation);
    if (merged[i].kernel_dimension != merged[i].multiplicity) {
      std::ostringstream os;
      os << "eigenvalue " << merged[i].lambda << ": count multiplicity "
         << merged[i].multiplicity << " but kernel dimension "
         << merged[i].kernel_dimension;
      log_warning(os.str());
    }
  }
  return merged;
}

// Each rho_nk with n > n_low must lie within the window around its
// asymptotic center whenever the predicted shift is small.
bool windows_consistent(const MatrixProblem& problem, const SpectralDataSet& data,
                        const ForwardOptions& opts) {
  if (problem.rank() < 1 || problem.rank() > problem.dim() - 1) return true;
  const RVector z1 = roots_P1(problem.Omega(), problem.H(), problem.T());
  const RVector z2 = roots_P2(problem.Omega(), problem.H(), problem.T());
  const double zmax = std::max(z1.cwiseAbs().maxCoeff(), z2.cwiseAbs().maxCoeff());
  const int p = problem.rank();
  for (const auto& e : data.entries) {
    if (e.n <= opts.n_low || zmax / (kPi * e.n) >= 0.2) continue;
    const double center = e.k <= p ? e.n - 0.5 : e.n;
    const double rho = std::sqrt(std::max(0.0, e.lambda));
    if (std::abs(rho - center) > opts.window_radius) return false;
  }
  return true;
}

}  // namespace

SpectralDataSet locate_eigenvalues(const MatrixProblem& problem, int N,
                                   const ForwardOptions& opts,
                                   std::vector<EigenCluster>* clusters_out) {
  if (N < 1) throw Error(ErrorCode::kInvalidDimension, "N must be at least 1");
  const int m = problem.dim();
  ForwardOptions o = opts;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto clusters = find_clusters(problem, N * m + 1, o);
    SpectralDataSet data;
    data.m = m;
    data.N = N;
    data.provenance = "computed";
    int index = 0;
    for (const auto& c : clusters) {
      for (int r = 0; r < c.multiplicity && index < N * m; ++r, ++index) {
        SpectralEntry e;
        e.n = index / m + 1;
        e.k = index % m + 1;
        e.lambda = c.lambda;
        data.entries.push_back(std::move(e));
      }
    }
    if (static_cast<int>(data.entries.size()) != N * m) {
      throw Error(ErrorCode::kCountMismatch, "eigenvalue scan ended early");
    }
    if (windows_consistent(problem, data, o)) {
      data.shift = spectrum_shift({&data});
      if (clusters_out) *clusters_out = std::move(clusters);
      return data;
    }
    o.propagation.base_steps *= 2;
  }
  throw Error(ErrorCode::kCountMismatch,
              "eigenvalue counts per asymptotic window do not match m after mesh refinement");
}

CMatrix compute_weight_matrix(const MatrixProblem& problem, double lambda0, int multiplicity,
                              double gap, const ForwardOptions& opts) {
  const int m = problem.dim();
  const int nodes = opts.contour_nodes;
  const double radius = std::min(gap / 3.0, 0.1);
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::kContour, "contour radius must be positive");
  }
  CMatrix full = CMatrix::Zero(m, m);
  CMatrix half = CMatrix::Zero(m, m);
  for (int k = 0; k < nodes; ++k) {
    const cplx e = std::polar(1.0, kTwoPi * k / nodes);
    const CMatrix mk = weyl_matrix(problem, lambda0 + radius * e, opts.propagation) * e;
    full += mk;
    if (k % 2 == 0) half += mk;
  }
  const CMatrix alpha = hermitian_part(-(radius / nodes) * full);
  const CMatrix alpha_half = hermitian_part(-(radius / (nodes / 2)) * half);
  const double scale = std::max(1e-300, opnorm(alpha));
  if (opnorm(alpha - alpha_half) > opts.contour_tol * scale) {
    std::ostringstream os;
    os << "contour quadrature at lambda = " << lambda0 << " did not converge (change "
       << opnorm(alpha - alpha_half) / scale << ")";
    throw Error(ErrorCode::kContour, os.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(alpha, Eigen::EigenvaluesOnly);
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > opts.rank_tol * scale) ++rank;
  }
  if (rank != multiplicity) {
    std::ostringstream os;
    os << "weight matrix at lambda = " << lambda0 << " has rank " << rank
       << " but the eigenvalue multiplicity is " << multiplicity;
    throw Error(ErrorCode::kMultiplicityInconsistency, os.str());
  }
  return alpha;
}

CMatrix eigenfunction_residue_oracle(const MatrixProblem& problem, double lambda0,
                                     int multiplicity, const ForwardOptions& opts) {
  const int m = problem.dim();
  PropagationOptions po = opts.propagation;
  po.record = true;
  po.fixed_steps = std::max(4096, required_steps(lambda0, po));
  const auto sol = propagate_S(problem, lambda0, po);
  // V(S) with the Dirichlet rows scaled by rho so both parts are O(1); the
  // kernel is unchanged because Ran T and Ran Tperp are orthogonal.
  const CMatrix& s_pi = sol.Y.back();
  const CMatrix& sp_pi = sol.Yp.back();
  const double rho = std::sqrt(std::max(1.0, std::abs(lambda0)));
  const CMatrix v = problem.T() * (sp_pi - problem.H() * s_pi) - rho * problem.Tperp() * s_pi;
  Eigen::JacobiSVD<CMatrix> svd(v, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double ref = std::max({sv(0), rho * opnorm(s_pi), opnorm(sp_pi)});
  int kernel = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < opts.rank_tol * ref) ++kernel;
  }
  if (kernel != multiplicity) {
    std::ostringstream os;
    os << "eigenspace dimension " << kernel << " differs from multiplicity " << multiplicity;
    throw Error(ErrorCode::kMultiplicityInconsistency, os.str());
  }
  const CMatrix c = svd.matrixV().rightCols(multiplicity);
  // Gram matrix of S c over [0, pi] by composite Simpson.
  const std::size_t n = sol.x.size() - 1;
  const double h = kPi / static_cast<double>(n);
  CMatrix g = CMatrix::Zero(m, m);
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    g += w * sol.Y[i].adjoint() * sol.Y[i];
  }
  g *= h / 3.0;
  const CMatrix cgc = c.adjoint() * g * c;
  return hermitian_part(c * cgc.inverse() * c.adjoint());
}

SpectralDataSet forward_spectral(const MatrixProblem& problem, int N,
                                 const ForwardOptions& opts) {
  std::vector<EigenCluster> clusters;
  SpectralDataSet data = locate_eigenvalues(problem, N, opts, &clusters);
  // Clusters that hold at least one entry with n <= N.
  std::size_t used = 0;
  int seen = 0;
  while (used < clusters.size() && seen < N * problem.dim()) {
    seen += clusters[used].multiplicity;
    ++used;
  }
  std::vector<CMatrix> alphas(used);
  parallel_for(used, opts.threads, [&](std::size_t i) {
    alphas[i] = compute_weight_matrix(problem, clusters[i].lambda, clusters[i].multiplicity,
                                      clusters[i].gap, opts);
  });
  std::size_t entry = 0;
  for (std::size_t i = 0; i < used; ++i) {
    for (int r = 0; r < clusters[i].multiplicity && entry < data.entries.size(); ++r) {
      data.entries[entry++].alpha = alphas[i];
    }
  }
  data = dedup_alpha(std::move(data));
  if (problem.rank() >= 1 && problem.rank() <= problem.dim() - 1) {
    data.coefficients = coefficients_from_problem(problem);
  }
  return data;
}

}  // namespace gsturm
