#include "gsturm/potential.hpp"

#include <algorithm>
#include <cmath>

#include "gsturm/linalg.hpp"

namespace gsturm {

namespace {

constexpr double kGauss5Nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                    0.5384693101056831, 0.9061798459386640};
constexpr double kGauss5Weights[5] = {0.2369268850561891, 0.4786286704993665,
                                      0.5688888888888889, 0.4786286704993665,
                                      0.2369268850561891};

}  // namespace

PotentialGrid::PotentialGrid(std::vector<double> mesh, std::vector<CMatrix> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorCode::kInvalidDimension, "potential grid has no samples");
  }
  dim_ = static_cast<int>(values_.front().rows());
  validate();
  const std::size_t n = mesh_.size() - 1;
  uniform_ = true;
  for (std::size_t i = 0; i <= n; ++i) {
    if (std::abs(mesh_[i] - kPi * static_cast<double>(i) / static_cast<double>(n)) >
        1e-13) {
      uniform_ = false;
      break;
    }
  }
  bool is_const = true;
  for (const auto& v : values_) {
    if ((v - values_.front()).cwiseAbs().maxCoeff() != 0.0) {
      is_const = false;
      break;
    }
  }
  if (is_const) constant_ = values_.front();
}

void PotentialGrid::validate() const {
  if (mesh_.size() != values_.size()) {
    throw Error(ErrorCode::kInvalidDimension, "mesh and sample counts differ");
  }
  if (mesh_.size() < static_cast<std::size_t>(kMinIntervals + 1)) {
    throw Error(ErrorCode::kInvalidDimension,
                "potential grid needs at least " + std::to_string(kMinIntervals) +
                    " intervals");
  }
  if (mesh_.front() != 0.0 || std::abs(mesh_.back() - kPi) > 1e-15) {
    throw Error(ErrorCode::kInvalidDimension, "potential mesh must span [0, pi]");
  }
  for (std::size_t i = 1; i < mesh_.size(); ++i) {
    if (!(mesh_[i] > mesh_[i - 1])) {
      throw Error(ErrorCode::kInvalidDimension, "potential mesh is not increasing");
    }
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const auto& v = values_[i];
    if (v.rows() != dim_ || v.cols() != dim_) {
      throw Error(ErrorCode::kInvalidDimension, "potential samples differ in size");
    }
    if (!v.allFinite()) {
      throw Error(ErrorCode::kInvalidDimension, "potential sample is not finite");
    }
    require_hermitian(v, kTolHermitian, "Q(x_" + std::to_string(i) + ")");
  }
}

PotentialGrid PotentialGrid::from_function(int m, const MatrixFunction& f, int nodes) {
  if (m < 1) throw Error(ErrorCode::kInvalidDimension, "m must be positive");
  std::vector<double> mesh(static_cast<std::size_t>(nodes));
  std::vector<CMatrix> vals(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    mesh[static_cast<std::size_t>(i)] =
        i == nodes - 1 ? kPi : kPi * static_cast<double>(i) / (nodes - 1);
    vals[static_cast<std::size_t>(i)] = f(mesh[static_cast<std::size_t>(i)]);
  }
  PotentialGrid g(std::move(mesh), std::move(vals));
  if (g.dim_ != m) throw Error(ErrorCode::kInvalidDimension, "potential dimension mismatch");
  g.exact_ = f;
  return g;
}

PotentialGrid PotentialGrid::constant(const CMatrix& c, int nodes) {
  return from_function(static_cast<int>(c.rows()), [c](double) { return c; }, nodes);
}

PotentialGrid PotentialGrid::zero(int m, int nodes) {
  return constant(CMatrix::Zero(m, m), nodes);
}

CMatrix PotentialGrid::operator()(double x) const {
  if (constant_) return *constant_;
  if (exact_) return exact_(x);
  const std::size_t n = mesh_.size() - 1;
  std::size_t i;
  if (uniform_) {
    const double t = x / kPi * static_cast<double>(n);
    i = static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, static_cast<double>(n - 1)));
  } else {
    auto it = std::upper_bound(mesh_.begin(), mesh_.end(), x);
    i = it == mesh_.begin() ? 0 : static_cast<std::size_t>(it - mesh_.begin()) - 1;
    i = std::min(i, n - 1);
  }
  // Four-point stencil i0..i0+3 containing [x_i, x_{i+1}].
  std::size_t i0 = i == 0 ? 0 : i - 1;
  if (i0 + 3 > n) i0 = n - 3;
  CMatrix out = CMatrix::Zero(dim_, dim_);
  for (std::size_t a = i0; a < i0 + 4; ++a) {
    double w = 1.0;
    for (std::size_t b = i0; b < i0 + 4; ++b) {
      if (b != a) w *= (x - mesh_[b]) / (mesh_[a] - mesh_[b]);
    }
    out += w * values_[a];
  }
  return hermitian_part(out);
}

CMatrix PotentialGrid::integral() const {
  if (constant_) return kPi * (*constant_);
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  if (exact_) {
    constexpr int kPanels = 512;
    const double h = kPi / kPanels;
    for (int i = 0; i < kPanels; ++i) {
      const double mid = (i + 0.5) * h;
      for (int g = 0; g < 5; ++g) {
        sum += (0.5 * h * kGauss5Weights[g]) * exact_(mid + 0.5 * h * kGauss5Nodes[g]);
      }
    }
    return hermitian_part(sum);
  }
  // Two-point Gauss per interval integrates the cubic interpolant exactly.
  const double g = 0.5 / std::sqrt(3.0);
  for (std::size_t i = 0; i + 1 < mesh_.size(); ++i) {
    const double h = mesh_[i + 1] - mesh_[i];
    const double mid = 0.5 * (mesh_[i] + mesh_[i + 1]);
    sum += (0.5 * h) * ((*this)(mid - g * h) + (*this)(mid + g * h));
  }
  return hermitian_part(sum);
}

bool PotentialGrid::is_diagonal(double tol) const {
  for (const auto& v : values_) {
    CMatrix off = v;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

PotentialGrid PotentialGrid::shifted(double c) const {
  const CMatrix id = CMatrix::Identity(dim_, dim_);
  std::vector<CMatrix> vals = values_;
  for (auto& v : vals) v += c * id;
  PotentialGrid g(mesh_, std::move(vals));
  if (exact_) {
    auto f = exact_;
    g.exact_ = [f, c, id](double x) -> CMatrix { return f(x) + c * id; };
  }
  return g;
}

}  // namespace gsturm
