#include "gsturm/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "gsturm/asymptotics.hpp"
#include "gsturm/parallel.hpp"

namespace gsturm {

namespace {

// Heads of the root clusters of z, separately on 1..p and p+1..m.
std::vector<int> cluster_heads(const RVector& z, int p) {
  std::vector<int> heads;
  for (int s = 0; s < z.size(); ++s) {
    const bool block_start = s == 0 || s == p;
    if (block_start ||
        std::abs(z(s) - z(s - 1)) > kMultipleRootTol * (1.0 + std::abs(z(s)))) {
      heads.push_back(s);
    }
  }
  return heads;
}

// Index of the cluster containing s (same block, same z within tolerance).
std::vector<int> cluster_labels(const RVector& z, int p) {
  const auto heads = cluster_heads(z, p);
  std::vector<int> label(z.size(), 0);
  int c = -1;
  for (int s = 0; s < z.size(); ++s) {
    if (std::find(heads.begin(), heads.end(), s) != heads.end()) ++c;
    label[s] = c;
  }
  return label;
}

void spot_check_model(const ModelProblem& model) {
  // The located eigenvalues must make V(S~) singular.
  const auto& d = model.data;
  for (std::size_t idx : {std::size_t{0}, d.entries.size() - 1}) {
    const double lam = d.entries[idx].lambda;
    auto [s, sp] = constant_S(model.basis, lam, kPi);
    const CMatrix tp = CMatrix::Identity(model.dim(), model.dim()) - model.T;
    const double rho = std::sqrt(std::max(1.0, std::abs(lam)));
    const CMatrix v = model.T * (sp - model.H * s) - rho * tp * s;
    Eigen::JacobiSVD<CMatrix> svd(v);
    const RVector sv = svd.singularValues();
    const double ref = std::max({sv(0), rho * opnorm(s), opnorm(sp)});
    if (sv(sv.size() - 1) > 1e-6 * ref) {
      std::ostringstream os;
      os << "model eigenvalue " << lam << " fails the closed-form check (sigma_min/ref = "
         << sv(sv.size() - 1) / ref << ")";
      log_warning(os.str());
    }
  }
}

ModelProblem finish_model(MatrixProblem problem, const AsymptoticCoefficients& coeffs, int N,
                          const ForwardOptions& opts) {
  ModelProblem model;
  model.kind = problem.kind();
  model.basis = *problem.constant_basis();
  model.T = problem.T();
  model.H = problem.H();
  model.h = problem.graph_h();
  model.coefficients = coeffs;
  model.data = forward_spectral(problem, N, opts);
  model.data.provenance = "model";
  model.problem = std::make_shared<const MatrixProblem>(std::move(problem));
  spot_check_model(model);
  return model;
}

void require_coefficient_conditions(const AsymptoticCoefficients& coeffs) {
  for (const auto& c : check_coefficient_conditions(coeffs)) {
    if (!c.pass) {
      throw Error(ErrorCode::kCoefficientConditions,
                  "cannot build the model problem: " + c.name + " (" + c.detail + ")");
    }
  }
}

// Series of int_0^x s_a s_b dt for small |a|, |b|.
double overlap_series(double a, double b, double x) {
  constexpr int kTerms = 24;
  double fa[kTerms], fb[kTerms];
  // fa[k] = (-a)^k x^(2k) / (2k+1)!
  double x2 = x * x;
  fa[0] = fb[0] = 1.0;
  for (int k = 1; k < kTerms; ++k) {
    const double d = (2.0 * k) * (2.0 * k + 1.0);
    fa[k] = fa[k - 1] * (-a) * x2 / d;
    fb[k] = fb[k - 1] * (-b) * x2 / d;
  }
  double sum = 0.0;
  for (int k = 0; k < kTerms; ++k) {
    for (int l = 0; l < kTerms; ++l) sum += fa[k] * fb[l] / (2.0 * (k + l) + 3.0);
  }
  return sum * x * x2;
}

// sin(d x) / d, continuous at d = 0.
cplx sin_ratio(cplx d, double x) {
  const cplx dx = d * x;
  if (std::abs(dx) < 1e-4) return x * (1.0 - dx * dx / 6.0);
  return std::sin(dx) / d;
}

double sin_ratio(double d, double x) {
  const double dx = d * x;
  if (std::abs(dx) < 1e-4) return x * (1.0 - dx * dx / 6.0);
  return std::sin(dx) / d;
}

}  // namespace

ModelProblem build_model_general(const AsymptoticCoefficients& coeffs, int N,
                                 const ForwardOptions& opts) {
  require_coefficient_conditions(coeffs);
  const int m = coeffs.m;
  CMatrix theta = CMatrix::Zero(m, m);
  for (int s : cluster_heads(coeffs.z, coeffs.p)) theta += coeffs.z(s) * coeffs.A[s];
  theta = hermitian_part(theta);

  // Theta~ must reproduce the coefficients it was built from.
  const auto back = general_coefficients(coeffs.T, theta);
  double dev = (back.z - coeffs.z).cwiseAbs().maxCoeff();
  for (int s = 0; s < m; ++s) dev = std::max(dev, opnorm(back.A[s] - coeffs.A[s]));
  if (dev > 1e-10 * (1.0 + coeffs.z.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "model Theta does not reproduce z, A (deviation " << dev << ")";
    throw Error(ErrorCode::kInconsistentCoefficients, os.str());
  }
  auto problem = MatrixProblem::general(PotentialGrid::constant(2.0 / kPi * theta), coeffs.T,
                                        CMatrix::Zero(m, m));
  return finish_model(std::move(problem), coeffs, N, opts);
}

ModelProblem build_model_graph(const RVector& omega, double z1, int N,
                               const ForwardOptions& opts) {
  const CMatrix q = (2.0 / kPi * omega).cast<cplx>().asDiagonal();
  const double h = omega.mean() - z1;
  auto problem = MatrixProblem::graph(PotentialGrid::constant(q), h);
  return finish_model(std::move(problem), graph_coefficients(omega, z1), N, opts);
}

ModelProblem build_model(const AsymptoticCoefficients& coeffs, int N,
                         const ForwardOptions& opts) {
  if (coeffs.kind == ProblemKind::kGraph && coeffs.omega) {
    require_coefficient_conditions(coeffs);
    return build_model_graph(*coeffs.omega, coeffs.z(0), N, opts);
  }
  return build_model_general(coeffs, N, opts);
}

double overlap_integral(double a, double b, double x) {
  if (x == 0.0) return 0.0;
  const double small = 0.25;
  if (std::abs(a) >= small && std::abs(b) >= small) {
    // Product-to-sum form; sin(d x)/d stays accurate as d -> 0.
    if (a > 0 && b > 0) {
      const double nu = std::sqrt(a), om = std::sqrt(b);
      return (sin_ratio(nu - om, x) - sin_ratio(nu + om, x)) / (2.0 * nu * om);
    }
    const cplx nu = std::sqrt(cplx(a)), om = std::sqrt(cplx(b));
    return ((sin_ratio(nu - om, x) - sin_ratio(nu + om, x)) / (2.0 * nu * om)).real();
  }
  if (std::abs(a - b) >= 0.1) {
    // Wronskian quotient.
    auto [sa, ca] = sine_cosine(a, x);
    auto [sb, cb] = sine_cosine(b, x);
    return ((sa * cb - ca * sb) / (a - b)).real();
  }
  return overlap_series(a, b, x);
}

CMatrix kernel_D(const ModelProblem& model, double x, double lambda, double mu) {
  const int m = model.dim();
  CVector d(m);
  for (int i = 0; i < m; ++i) {
    d(i) = overlap_integral(lambda - model.basis.c(i), mu - model.basis.c(i), x);
  }
  return model.basis.U.adjoint() * d.asDiagonal() * model.basis.U;
}

CMatrix kernel_Dx(const ModelProblem& model, double x, double lambda, double mu) {
  auto [sl, spl] = constant_S(model.basis, lambda, x);
  auto [sm, spm] = constant_S(model.basis, mu, x);
  return sl.adjoint() * sm;
}

// ---------------------------------------------------------------------------
// Grouping.

GroupPartition build_groups(const SpectralDataSet& data, const SpectralDataSet& model,
                            const AsymptoticCoefficients& coeffs, double separation) {
  if (data.m != model.m) {
    throw Error(ErrorCode::kInvalidDimension, "data and model differ in m");
  }
  const int m = data.m;
  const int p = coeffs.p;
  const int N = std::min(data.N, model.N);
  GroupPartition part;
  part.shift = spectrum_shift({&data, &model});
  auto lambda_of = [&](const NodeTag& t) {
    return (t.s == 0 ? data : model).at(t.l, t.j).lambda;
  };
  auto rho_of = [&](const NodeTag& t) { return std::sqrt(lambda_of(t) + part.shift); };
  auto range = [&](int n_lo, int n_hi, int k_lo, int k_hi) {
    double lo = 1e300, hi = -1e300;
    for (int n = n_lo; n <= n_hi; ++n) {
      for (int k = k_lo; k <= k_hi; ++k) {
        for (int s = 0; s < 2; ++s) {
          const double r = rho_of({n, k, s});
          lo = std::min(lo, r);
          hi = std::max(hi, r);
        }
      }
    }
    return std::pair<double, double>{lo, hi};
  };

  const int n0_max = std::max(1, N / 2);
  int n0 = 0;
  for (int cand = 1; cand <= n0_max && n0 == 0; ++cand) {
    auto prev = range(1, cand, 1, m);
    bool ok = true;
    for (int n = cand + 1; n <= N && ok; ++n) {
      for (auto [k_lo, k_hi] : {std::pair{1, p}, std::pair{p + 1, m}}) {
        const auto cur = range(n, n, k_lo, k_hi);
        if (cur.first < prev.second + separation) {
          ok = false;
          break;
        }
        prev = cur;
      }
    }
    if (ok) n0 = cand;
  }
  if (n0 == 0) {
    std::ostringstream os;
    os << "no n0 <= " << n0_max << " separates the rho groups by " << separation;
    throw Error(ErrorCode::kGrouping, os.str());
  }
  part.n0 = n0;

  const auto label = cluster_labels(coeffs.z, p);
  auto make_group = [&](int k, double center, int n_lo, int n_hi, int k_lo, int k_hi) {
    SpectralGroup g;
    g.k = k;
    g.center = center;
    for (int n = n_lo; n <= n_hi; ++n) {
      for (int j = k_lo; j <= k_hi; ++j) {
        for (int s = 0; s < 2; ++s) {
          g.nodes.push_back({n, j, s});
          g.rho.push_back(rho_of({n, j, s}));
        }
      }
    }
    return g;
  };

  // Union-find subgroups: `seed(a, b)` decides the initial merges; equal
  // values always share a subgroup.
  auto partition = [&](const SpectralGroup& g, auto seed) {
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) {
      return parent[i] == i ? i : parent[i] = find(parent[i]);
    };
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const double la = lambda_of(g.nodes[a]), lb = lambda_of(g.nodes[b]);
        if (seed(g.nodes[a], g.nodes[b]) || std::abs(la - lb) <= 1e-10 * (1.0 + std::abs(la))) {
          parent[find(a)] = find(b);
        }
      }
    }
    std::vector<std::vector<int>> subs;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
      const int r = find(i);
      if (slot[r] < 0) {
        slot[r] = static_cast<int>(subs.size());
        subs.emplace_back();
      }
      subs[slot[r]].push_back(i);
    }
    return subs;
  };

  auto alpha_diff = [&](const SpectralGroup& g, const std::vector<int>& idx) {
    CMatrix d = CMatrix::Zero(m, m);
    for (int i : idx) {
      const auto& t = g.nodes[i];
      const CMatrix& a = (t.s == 0 ? data : model).at(t.l, t.j).alpha_prime;
      d += t.s == 0 ? a : CMatrix(-a);
    }
    return opnorm(d);
  };

  auto xi_of = [&](const SpectralGroup& g, const std::vector<std::vector<int>>& subs) {
    const double k = g.k;
    double pairs = 0.0, alpha_sub = 0.0;
    for (const auto& sg : subs) {
      for (int a : sg) {
        for (int b : sg) pairs += std::abs(g.rho[a] - g.rho[b]);
      }
      alpha_sub += alpha_diff(g, sg);
    }
    std::vector<int> all(g.nodes.size());
    std::iota(all.begin(), all.end(), 0);
    return pairs + alpha_sub / (k * k * k) + alpha_diff(g, all) / (k * k);
  };

  auto finalize = [&](SpectralGroup g, bool by_clusters) {
    auto finest = partition(g, [](const NodeTag& a, const NodeTag& b) {
      return a.l == b.l && a.j == b.j;
    });
    std::vector<std::vector<int>> coarse;
    if (g.k == 1) {
      coarse = {std::vector<int>(g.nodes.size())};
      std::iota(coarse[0].begin(), coarse[0].end(), 0);
    } else if (by_clusters) {
      coarse = partition(g, [&](const NodeTag& a, const NodeTag& b) {
        return label[a.j - 1] == label[b.j - 1];
      });
    }
    const double xi_fine = xi_of(g, finest);
    g.subgroups = finest;
    g.xi = xi_fine;
    if (!coarse.empty()) {
      const double xi_coarse = xi_of(g, coarse);
      if (xi_coarse < xi_fine) {
        g.subgroups = coarse;
        g.xi = xi_coarse;
      }
    }
    return g;
  };

  part.groups.push_back(finalize(make_group(1, 0.0, 1, n0, 1, m), false));
  for (int j = 1; n0 + j <= N; ++j) {
    part.groups.push_back(finalize(make_group(2 * j, n0 + j - 0.5, n0 + j, n0 + j, 1, p), true));
    part.groups.push_back(
        finalize(make_group(2 * j + 1, n0 + j, n0 + j, n0 + j, p + 1, m), true));
  }
  double sum = 0.0;
  for (const auto& g : part.groups) sum += (g.k * g.xi) * (g.k * g.xi);
  part.Xi = std::sqrt(sum);
  return part;
}

// ---------------------------------------------------------------------------
// Main equation.

MainEquation::MainEquation(const SpectralDataSet& data_in, const ModelProblem& model)
    : model_(model), m_(model.dim()) {
  if (data_in.m != m_) {
    throw Error(ErrorCode::kInvalidDimension, "data and model differ in m");
  }
  N_ = data_in.N;
  if (model.data.N < N_) {
    throw Error(ErrorCode::kInvalidDimension, "model data shorter than the input data");
  }
  bool have_prime = true;
  for (const auto& e : data_in.entries) have_prime = have_prime && e.alpha_prime.size() > 0;
  const SpectralDataSet data = have_prime ? data_in : dedup_alpha(data_in);

  const CMatrix& U = model.basis.U;
  for (int l = 1; l <= N_; ++l) {
    for (int j = 1; j <= m_; ++j) {
      for (int s = 0; s < 2; ++s) {
        const auto& e = (s == 0 ? data : model.data).at(l, j);
        nodes_.push_back({l, j, s});
        lambda_.push_back(e.lambda);
        sign_.push_back(s == 0 ? 1.0 : -1.0);
        W_.push_back(U * e.alpha_prime * U.adjoint());
      }
    }
  }
  order_.resize(nodes_.size());
  std::iota(order_.begin(), order_.end(), 0);
}

void MainEquation::set_order(std::vector<int> order) {
  std::vector<int> check = order;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i) {
    if (check[i] != static_cast<int>(i) || check.size() != nodes_.size()) {
      throw Error(ErrorCode::kInvalidDimension, "node order is not a permutation");
    }
  }
  order_ = std::move(order);
}

MainEquation::Solution MainEquation::solve(double x, double max_condition) const {
  return run(x, max_condition, false);
}

MainEquation::Solution MainEquation::solve_with_derivative(double x,
                                                           double max_condition) const {
  return run(x, max_condition, true);
}

MainEquation::Solution MainEquation::run(double x, double max_condition,
                                         bool derivative) const {
  const int K = static_cast<int>(nodes_.size());
  const int m = m_;
  const RVector& c = model_.basis.c;
  const CMatrix& U = model_.basis.U;

  // pos[b]: block position of node b in the system.
  std::vector<int> pos(K);
  for (int i = 0; i < K; ++i) pos[order_[i]] = i;

  RMatrix s(K, m), cs(K, m);
  for (int b = 0; b < K; ++b) {
    for (int i = 0; i < m; ++i) {
      auto [si, ci] = sine_cosine(lambda_[b] - c(i), x);
      s(b, i) = si.real();
      cs(b, i) = ci.real();
    }
  }

  std::vector<int> active;
  for (int b = 0; b < K; ++b) {
    if (W_[b].cwiseAbs().maxCoeff() > 0.0) active.push_back(b);
  }

  // Block (a, b): delta_ab I + sign_b diag(d_ba) W_b^T.
  CMatrix A = CMatrix::Identity(K * m, K * m);
  for (int b : active) {
    const CMatrix wt = sign_[b] * W_[b].transpose();
    for (int a = 0; a < K; ++a) {
      for (int i = 0; i < m; ++i) {
        const double d = overlap_integral(lambda_[b] - c(i), lambda_[a] - c(i), x);
        if (d == 0.0) continue;
        A.block(pos[a] * m + i, pos[b] * m, 1, m) += d * wt.row(i);
      }
    }
  }
  CMatrix R = CMatrix::Zero(K * m, m);
  for (int a = 0; a < K; ++a) {
    for (int i = 0; i < m; ++i) R(pos[a] * m + i, i) = s(a, i);
  }

  Eigen::PartialPivLU<CMatrix> lu(A);
  Solution sol;
  sol.x = x;
  sol.condition = 1.0 / lu.rcond();
  if (!(sol.condition <= max_condition)) {
    std::ostringstream os;
    os << "main equation ill-conditioned at x = " << x << ", N = " << N_
       << " (condition estimate " << sol.condition << ")";
    throw Error(ErrorCode::kIllConditioned, os.str());
  }

  auto refine = [&](const CMatrix& rhs, double* residual) {
    CMatrix y = lu.solve(rhs);
    const double scale = std::max(rhs.norm(), 1e-300);
    double res = (rhs - A * y).norm() / scale;
    for (int it = 0; it < 3 && res > 1e-14; ++it) {
      y += lu.solve(rhs - A * y);
      res = (rhs - A * y).norm() / scale;
    }
    if (rhs.norm() == 0.0) res = 0.0;
    *residual = std::max(*residual, res);
    return y;
  };

  const CMatrix Y = refine(R, &sol.residual);
  std::vector<CMatrix> xhat(K);
  for (int a = 0; a < K; ++a) xhat[a] = Y.block(pos[a] * m, 0, m, m).transpose();

  sol.S.resize(K);
  for (int a = 0; a < K; ++a) sol.S[a] = U.adjoint() * xhat[a] * U;

  if (derivative) {
    // rhs_a = diag(c_a) - diag(s_a) G, G(i,:) = sum_b s_b,i (sign_b W_b^T X^_b^T)(i,:).
    CMatrix G = CMatrix::Zero(m, m);
    for (int b : active) {
      const CMatrix P = sign_[b] * W_[b].transpose() * xhat[b].transpose();
      for (int i = 0; i < m; ++i) G.row(i) += s(b, i) * P.row(i);
    }
    CMatrix Rp = CMatrix::Zero(K * m, m);
    for (int a = 0; a < K; ++a) {
      for (int i = 0; i < m; ++i) {
        Rp.row(pos[a] * m + i) = -s(a, i) * G.row(i);
        Rp(pos[a] * m + i, i) += cs(a, i);
      }
    }
    const CMatrix Yp = refine(Rp, &sol.residual);
    sol.Sprime.resize(K);
    for (int a = 0; a < K; ++a) {
      sol.Sprime[a] = U.adjoint() * Yp.block(pos[a] * m, 0, m, m).transpose() * U;
    }
  }
  return sol;
}

std::pair<CMatrix, CMatrix> MainEquation::epsilon0(const Solution& sol) const {
  const int m = m_;
  const RVector& c = model_.basis.c;
  const CMatrix& U = model_.basis.U;
  CMatrix e = CMatrix::Zero(m, m), ep = CMatrix::Zero(m, m);
  for (std::size_t b = 0; b < nodes_.size(); ++b) {
    if (W_[b].cwiseAbs().maxCoeff() == 0.0) continue;
    CVector s(m), cs(m);
    for (int i = 0; i < m; ++i) {
      auto [si, ci] = sine_cosine(lambda_[b] - c(i), sol.x);
      s(i) = si;
      cs(i) = ci;
    }
    const CMatrix xw = U * sol.S[b] * U.adjoint() * W_[b];
    e += sign_[b] * xw * s.asDiagonal();
    ep += sign_[b] * xw * cs.asDiagonal();
    if (!sol.Sprime.empty()) {
      ep += sign_[b] * (U * sol.Sprime[b] * U.adjoint() * W_[b]) * s.asDiagonal();
    }
  }
  return {U.adjoint() * e * U, U.adjoint() * ep * U};
}

// ---------------------------------------------------------------------------
// Reconstruction.

std::vector<double> uniform_mesh(int points) {
  std::vector<double> mesh(points);
  for (int i = 0; i < points; ++i) mesh[i] = kPi * i / (points - 1);
  return mesh;
}

double graph_h_from_z(const RVector& z) {
  const Eigen::Index m = z.size();
  return z.tail(m - 1).sum() / static_cast<double>(m - 1) - z(0);
}

double l2_distance(const std::vector<double>& mesh, const std::vector<CMatrix>& a,
                   const std::vector<CMatrix>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
    const double fa = (a[i] - b[i]).squaredNorm();
    const double fb = (a[i + 1] - b[i + 1]).squaredNorm();
    sum += 0.5 * (mesh[i + 1] - mesh[i]) * (fa + fb);
  }
  return std::sqrt(sum);
}

SpectralDataSet perturb_rho(const SpectralDataSet& data, int n, int k, double delta) {
  SpectralDataSet out = data;
  const double c0 = spectrum_shift({&data});
  auto& e = out.at(n, k);
  const double rho = std::sqrt(e.lambda + c0) + delta;
  e.lambda = rho * rho - c0;
  return dedup_alpha(std::move(out));
}

std::vector<CMatrix> sample_potential(const MatrixProblem& problem,
                                      const std::vector<double>& mesh) {
  std::vector<CMatrix> out;
  out.reserve(mesh.size());
  for (double x : mesh) out.push_back(problem.Q()(x));
  return out;
}

Reconstruction reconstruct(const SpectralDataSet& data, const ModelProblem& model,
                           const InverseOptions& opts) {
  const int m = model.dim();
  const MainEquation eq(data, model);
  Reconstruction rec;
  rec.kind = model.kind;
  rec.N = data.N;
  rec.mesh = uniform_mesh(opts.mesh_points);
  const std::size_t P = rec.mesh.size();
  rec.eps0.resize(P);
  rec.eps.resize(P);
  rec.Q.resize(P);
  std::vector<double> cond(P), res(P);

  parallel_for(P, opts.threads, [&](std::size_t i) {
    const auto sol = eq.solve_with_derivative(rec.mesh[i], opts.max_condition);
    auto [e0, e0p] = eq.epsilon0(sol);
    rec.eps0[i] = std::move(e0);
    rec.eps[i] = -2.0 * e0p;
    cond[i] = sol.condition;
    res[i] = sol.residual;
  });

  const CMatrix& qt = model.basis.C;
  for (std::size_t i = 0; i < P; ++i) {
    const CMatrix q = qt + rec.eps[i];
    rec.herm_residual = std::max(rec.herm_residual, hermitian_defect(q) / (1.0 + opnorm(q)));
    rec.Q[i] = hermitian_part(q);
    rec.condition_max = std::max(rec.condition_max, cond[i]);
    rec.residual_max = std::max(rec.residual_max, res[i]);
  }
  rec.eps0_origin = opnorm(rec.eps0.front());
  rec.eps0_pi = rec.eps0.back();
  rec.H = hermitian_part(model.H - model.T * rec.eps0_pi * model.T);

  CMatrix mean_eps = CMatrix::Zero(m, m);
  for (std::size_t i = 0; i + 1 < P; ++i) {
    mean_eps += 0.25 * (rec.mesh[i + 1] - rec.mesh[i]) * (rec.eps[i] + rec.eps[i + 1]);
  }
  rec.omega_smoke = opnorm(mean_eps);

  if (model.kind == ProblemKind::kGraph) {
    for (const auto& q : rec.Q) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          if (j != k) rec.offdiag_residual = std::max(rec.offdiag_residual, std::abs(q(j, k)));
        }
      }
    }
    if (opts.enforce_diagonal && rec.offdiag_residual > opts.offdiag_tol) {
      std::ostringstream os;
      os << "reconstructed potential is not diagonal: off-diagonal residual "
         << rec.offdiag_residual << " > " << opts.offdiag_tol;
      throw Error(ErrorCode::kDiagonalityViolation, os.str());
    }
    rec.q.assign(m, std::vector<double>(P));
    for (std::size_t i = 0; i < P; ++i) {
      for (int j = 0; j < m; ++j) rec.q[j][i] = rec.Q[i](j, j).real();
    }
    rec.h = graph_h_from_z(model.coefficients.z);
    rec.h_boundary = rec.H.trace().real();
  }
  return rec;
}

}  // namespace gsturm
