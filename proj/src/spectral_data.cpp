#include "gsturm/spectral_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gsturm {

double SpectralDataSet::min_lambda() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) v = std::min(v, e.lambda);
  return v;
}

SpectralDataSet SpectralDataSet::truncated(int n_max) const {
  SpectralDataSet out = *this;
  out.N = std::min(N, n_max);
  out.entries.resize(static_cast<std::size_t>(out.N * m));
  return out;
}

std::vector<std::vector<std::size_t>> multiplicity_groups(const SpectralDataSet& data,
                                                          double tol) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.entries.size(); ++i) {
    const double lam = data.entries[i].lambda;
    if (!groups.empty()) {
      const double head = data.entries[groups.back().front()].lambda;
      if (std::abs(lam - head) <= tol * (1.0 + std::abs(head))) {
        groups.back().push_back(i);
        continue;
      }
    }
    groups.push_back({i});
  }
  return groups;
}

SpectralDataSet dedup_alpha(SpectralDataSet data) {
  for (const auto& g : multiplicity_groups(data)) {
    const CMatrix& head = data.entries[g.front()].alpha;
    const double scale = std::max(1e-300, opnorm(head));
    for (std::size_t j = 0; j < g.size(); ++j) {
      auto& e = data.entries[g[j]];
      if (j > 0 && opnorm(e.alpha - head) > 1e-8 * scale) {
        std::ostringstream os;
        os << "equal eigenvalues with unequal weight matrices at (n, k) = (" << e.n << ", "
           << e.k << ")";
        throw Error(ErrorCode::kSdViolation, os.str());
      }
      e.alpha_prime = j == 0 ? e.alpha : CMatrix::Zero(data.m, data.m);
    }
  }
  return data;
}

double spectrum_shift(const std::vector<const SpectralDataSet*>& sets) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto* s : sets) lo = std::min(lo, s->min_lambda());
  return std::max(0.0, 1.0 - lo);
}

}  // namespace gsturm
