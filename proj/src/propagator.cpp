#include "gsturm/propagator.hpp"

#include <cmath>
#include <sstream>

namespace gsturm {

/// Fourth-order Magnus data for a uniform step mesh. Each step uses the
/// split exp(W0/2) exp(W1) exp(W0/2), where W0 is the exact propagator of
/// the averaged potential over the two Gauss points and W1 the commutator
/// correction blockdiag(C, -C), C = sqrt(3) h^2 / 12 (Q1 - Q2). All blocks are
/// stored in the eigenbasis of the averaged potential of each step.
struct MagnusTable {
  int m = 0;
  int n = 0;
  double h = 0.0;
  std::vector<CMatrix> V;       // averaged Q = V diag(d) V^dagger
  std::vector<RVector> d;
  std::vector<CMatrix> e_plus;  // V^dagger (I + C + C^2/2) V
  std::vector<CMatrix> e_minus; // V^dagger (I - C + C^2/2) V
  std::vector<CMatrix> w;       // V_{i+1}^dagger V_i
};

std::shared_ptr<const MagnusTable> PropagatorCache::table(int steps) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = tables_.find(steps);
  if (it != tables_.end()) return it->second;

  auto t = std::make_shared<MagnusTable>();
  const int m = q_.dim();
  t->m = m;
  t->n = steps;
  t->h = kPi / steps;
  const double h = t->h;
  const double g = std::sqrt(3.0) / 6.0;
  const CMatrix id = CMatrix::Identity(m, m);
  t->V.resize(steps);
  t->d.resize(steps);
  t->e_plus.resize(steps);
  t->e_minus.resize(steps);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  for (int i = 0; i < steps; ++i) {
    const double x0 = i * h;
    const CMatrix q1 = q_(x0 + (0.5 - g) * h);
    const CMatrix q2 = q_(x0 + (0.5 + g) * h);
    es.compute(hermitian_part(0.5 * (q1 + q2)));
    const CMatrix& v = es.eigenvectors();
    const CMatrix c = (std::sqrt(3.0) * h * h / 12.0) * (q1 - q2);
    const CMatrix c2 = 0.5 * c * c;
    t->V[i] = v;
    t->d[i] = es.eigenvalues();
    t->e_plus[i] = v.adjoint() * (id + c + c2) * v;
    t->e_minus[i] = v.adjoint() * (id - c + c2) * v;
  }
  t->w.resize(steps > 0 ? steps - 1 : 0);
  for (int i = 0; i + 1 < steps; ++i) t->w[i] = t->V[i + 1].adjoint() * t->V[i];
  tables_.emplace(steps, t);
  return t;
}

CMatrix wronskian(const CMatrix& y, const CMatrix& yp, const CMatrix& z, const CMatrix& zp) {
  return y * zp - yp * z;
}

int required_steps(cplx lambda, const PropagationOptions& opts) {
  if (opts.fixed_steps > 0) return opts.fixed_steps;
  const double hmax = 0.5 / std::sqrt(1.0 + std::abs(lambda));
  int n = opts.base_steps;
  while (kPi / n > hmax) {
    n *= 2;
    if (n > opts.max_steps) {
      std::ostringstream os;
      os << "lambda = " << lambda << " needs more than " << opts.max_steps
         << " steps (required step <= " << hmax << ")";
      throw Error(ErrorCode::kResolution, os.str());
    }
  }
  return n;
}

namespace {

struct HalfStep {
  CVector s, c, ms;  // sin(nu t)/nu, cos(nu t), -nu^2 sin(nu t)/nu
};

void half_step_coeffs(cplx lambda, const RVector& d, double tau, HalfStep& hs) {
  const auto m = d.size();
  hs.s.resize(m);
  hs.c.resize(m);
  hs.ms.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const cplx a = lambda - d(j);
    auto [s, c] = sine_cosine(a, tau);
    hs.s(j) = s;
    hs.c(j) = c;
    hs.ms(j) = -a * s;
  }
}

void apply_half(const HalfStep& hs, CMatrix& top, CMatrix& bot) {
  for (Eigen::Index j = 0; j < top.rows(); ++j) {
    for (Eigen::Index k = 0; k < top.cols(); ++k) {
      const cplx y = top(j, k);
      const cplx yp = bot(j, k);
      top(j, k) = hs.c(j) * y + hs.s(j) * yp;
      bot(j, k) = hs.ms(j) * y + hs.c(j) * yp;
    }
  }
}

void record(SolutionPair& out, double x, const CMatrix& v, const CMatrix& top,
            const CMatrix& bot) {
  out.x.push_back(x);
  out.Y.push_back(v * top);
  out.Yp.push_back(v * bot);
}

SolutionPair magnus_forward(const MagnusTable& t, cplx lambda, const CMatrix& y0,
                            const CMatrix& yp0, bool rec) {
  SolutionPair out;
  out.lambda = lambda;
  CMatrix top = t.V[0].adjoint() * y0;
  CMatrix bot = t.V[0].adjoint() * yp0;
  CMatrix tmp(top.rows(), top.cols());
  out.x.push_back(0.0);
  out.Y.push_back(y0);
  out.Yp.push_back(yp0);
  HalfStep hs;
  for (int i = 0; i < t.n; ++i) {
    half_step_coeffs(lambda, t.d[i], 0.5 * t.h, hs);
    apply_half(hs, top, bot);
    tmp.noalias() = t.e_plus[i] * top;
    top = tmp;
    tmp.noalias() = t.e_minus[i] * bot;
    bot = tmp;
    apply_half(hs, top, bot);
    const double x = i + 1 == t.n ? kPi : (i + 1) * t.h;
    if (rec || i + 1 == t.n) record(out, x, t.V[i], top, bot);
    if (i + 1 < t.n) {
      tmp.noalias() = t.w[i] * top;
      top = tmp;
      tmp.noalias() = t.w[i] * bot;
      bot = tmp;
    }
  }
  return out;
}

SolutionPair magnus_backward(const MagnusTable& t, cplx lambda, const CMatrix& y1,
                             const CMatrix& yp1, bool rec) {
  SolutionPair rev;
  rev.lambda = lambda;
  const int n = t.n;
  CMatrix top = t.V[n - 1].adjoint() * y1;
  CMatrix bot = t.V[n - 1].adjoint() * yp1;
  CMatrix tmp(top.rows(), top.cols());
  rev.x.push_back(kPi);
  rev.Y.push_back(y1);
  rev.Yp.push_back(yp1);
  HalfStep hs;
  for (int i = n - 1; i >= 0; --i) {
    half_step_coeffs(lambda, t.d[i], -0.5 * t.h, hs);
    apply_half(hs, top, bot);
    tmp.noalias() = t.e_minus[i] * top;
    top = tmp;
    tmp.noalias() = t.e_plus[i] * bot;
    bot = tmp;
    apply_half(hs, top, bot);
    if (rec || i == 0) record(rev, i * t.h, t.V[i], top, bot);
    if (i > 0) {
      tmp.noalias() = t.w[i - 1].adjoint() * top;
      top = tmp;
      tmp.noalias() = t.w[i - 1].adjoint() * bot;
      bot = tmp;
    }
  }
  SolutionPair out;
  out.lambda = lambda;
  out.x.assign(rev.x.rbegin(), rev.x.rend());
  out.Y.assign(rev.Y.rbegin(), rev.Y.rend());
  out.Yp.assign(rev.Yp.rbegin(), rev.Yp.rend());
  return out;
}

// Closed-form sine/cosine matrix functions of a constant potential.
struct ConstantFunctions {
  CMatrix s, c, cp;  // s(x), c(x), c'(x) = -(lambda - C) s(x)
};

ConstantFunctions constant_functions(const ConstantPotentialBasis& b, cplx lambda, double x) {
  const int m = b.dim();
  CVector s(m), c(m), cp(m);
  for (int i = 0; i < m; ++i) {
    const cplx a = lambda - b.c(i);
    auto [si, ci] = sine_cosine(a, x);
    s(i) = si;
    c(i) = ci;
    cp(i) = -a * si;
  }
  return {b.U.adjoint() * s.asDiagonal() * b.U, b.U.adjoint() * c.asDiagonal() * b.U,
          b.U.adjoint() * cp.asDiagonal() * b.U};
}

bool use_closed_form(const MatrixProblem& p, const PropagationOptions& opts) {
  return opts.allow_closed_form && p.constant_basis().has_value();
}

std::vector<double> node_list(int n, bool rec) {
  std::vector<double> xs;
  if (!rec) return {0.0, kPi};
  for (int i = 0; i <= n; ++i) xs.push_back(i == n ? kPi : i * kPi / n);
  return xs;
}

}  // namespace

SolutionPair propagate_S(const MatrixProblem& problem, cplx lambda,
                         const PropagationOptions& opts) {
  const int m = problem.dim();
  const int n = required_steps(lambda, opts);
  if (use_closed_form(problem, opts)) {
    SolutionPair out;
    out.lambda = lambda;
    for (double x : node_list(n, opts.record)) {
      auto f = constant_functions(*problem.constant_basis(), lambda, x);
      out.x.push_back(x);
      out.Y.push_back(f.s);
      out.Yp.push_back(f.c);
    }
    return out;
  }
  auto table = problem.cache().table(n);
  return magnus_forward(*table, lambda, CMatrix::Zero(m, m), CMatrix::Identity(m, m),
                        opts.record);
}

SolutionPair propagate_Psi(const MatrixProblem& problem, cplx lambda,
                           const PropagationOptions& opts) {
  const int n = required_steps(lambda, opts);
  const CMatrix& t = problem.T();
  const CMatrix bc = problem.Tperp() + problem.H() * t;
  if (use_closed_form(problem, opts)) {
    SolutionPair out;
    out.lambda = lambda;
    for (double x : node_list(n, opts.record)) {
      auto f = constant_functions(*problem.constant_basis(), lambda, kPi - x);
      out.x.push_back(x);
      out.Y.push_back(f.c * t - f.s * bc);
      out.Yp.push_back(-f.cp * t + f.c * bc);
    }
    return out;
  }
  auto table = problem.cache().table(n);
  return magnus_backward(*table, lambda, t, bc, opts.record);
}

void visit_S_frames(const MatrixProblem& problem, cplx lambda, const PropagationOptions& opts,
                    const FrameVisitor& visit) {
  const int m = problem.dim();
  const int n = required_steps(lambda, opts);
  if (use_closed_form(problem, opts)) {
    for (double x : node_list(n, true)) {
      auto f = constant_functions(*problem.constant_basis(), lambda, x);
      visit(x, f.s, f.c);
    }
    return;
  }
  const auto table = problem.cache().table(n);
  const MagnusTable& t = *table;
  CMatrix top = CMatrix::Zero(m, m);
  CMatrix bot = t.V[0].adjoint();
  CMatrix tmp(m, m), stacked(2 * m, m);
  visit(0.0, CMatrix::Zero(m, m), CMatrix::Identity(m, m));
  HalfStep hs;
  for (int i = 0; i < t.n; ++i) {
    half_step_coeffs(lambda, t.d[i], 0.5 * t.h, hs);
    apply_half(hs, top, bot);
    tmp.noalias() = t.e_plus[i] * top;
    top = tmp;
    tmp.noalias() = t.e_minus[i] * bot;
    bot = tmp;
    apply_half(hs, top, bot);
    if (top.cwiseAbs().maxCoeff() + bot.cwiseAbs().maxCoeff() > 1e4) {
      stacked << top, bot;
      Eigen::HouseholderQR<CMatrix> qr(stacked);
      const CMatrix q = qr.householderQ() * CMatrix::Identity(2 * m, m);
      top = q.topRows(m);
      bot = q.bottomRows(m);
    }
    visit(i + 1 == t.n ? kPi : (i + 1) * t.h, t.V[i] * top, t.V[i] * bot);
    if (i + 1 < t.n) {
      tmp.noalias() = t.w[i] * top;
      top = tmp;
      tmp.noalias() = t.w[i] * bot;
      bot = tmp;
    }
  }
}

std::pair<CMatrix, CMatrix> S_at_pi(const MatrixProblem& problem, cplx lambda,
                                    const PropagationOptions& opts) {
  PropagationOptions o = opts;
  o.record = false;
  auto sol = propagate_S(problem, lambda, o);
  return {sol.Y.back(), sol.Yp.back()};
}

std::pair<CMatrix, CMatrix> Psi_at_zero(const MatrixProblem& problem, cplx lambda,
                                        const PropagationOptions& opts) {
  PropagationOptions o = opts;
  o.record = false;
  auto sol = propagate_Psi(problem, lambda, o);
  return {sol.Y.front(), sol.Yp.front()};
}

CMatrix boundary_form(const CMatrix& y_pi, const CMatrix& yp_pi, const CMatrix& t,
                      const CMatrix& h) {
  const CMatrix tp = CMatrix::Identity(t.rows(), t.cols()) - t;
  return t * (yp_pi - h * y_pi) - tp * y_pi;
}

CMatrix weyl_matrix(const MatrixProblem& problem, cplx lambda, const PropagationOptions& opts) {
  auto [psi, psip] = Psi_at_zero(problem, lambda, opts);
  Eigen::JacobiSVD<CMatrix> svd(psi);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > 1e12) {
    std::ostringstream os;
    os << "Psi(0, lambda) is near-singular at lambda = " << lambda
       << " (condition " << (smin > 0.0 ? sv(0) / smin : INFINITY) << ")";
    throw Error(ErrorCode::kPoleProximity, os.str());
  }
  return psip * psi.partialPivLu().inverse();
}

cplx char_det(const MatrixProblem& problem, cplx lambda, const PropagationOptions& opts) {
  auto [s, sp] = S_at_pi(problem, lambda, opts);
  return boundary_form(s, sp, problem.T(), problem.H()).determinant();
}

}  // namespace gsturm
