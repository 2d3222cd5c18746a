#pragma once

// Central finite differences and the norm-based relative error used by every
// gradient check: |fd - an| / max(|fd|, |an|).

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace fd {

inline std::vector<double> gradient(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto plus = x, minus = x;
    plus[k] += h;
    minus[k] -= h;
    g[k] = (f(plus) - f(minus)) / (2 * h);
  }
  return g;
}

inline double relative_error(const std::vector<double>& numeric, const std::vector<double>& analytic) {
  double diff = 0, n1 = 0, n2 = 0;
  for (std::size_t k = 0; k < numeric.size(); ++k) {
    diff += (numeric[k] - analytic[k]) * (numeric[k] - analytic[k]);
    n1 += numeric[k] * numeric[k];
    n2 += analytic[k] * analytic[k];
  }
  const double scale = std::sqrt(std::max(n1, n2));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

// Half squared distance to a target, the loss every check differentiates.
inline double half_sq(const std::vector<double>& out, const std::vector<double>& target) {
  double total = 0;
  for (std::size_t i = 0; i < out.size(); ++i) total += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
  return total;
}

}  // namespace fd
