// SPDX-License-Identifier: Apache-2.0
#include "spero/stats.hpp"

#include <cmath>

namespace spero::stats {

double pearson(const double* x, const double* y, size_t n) {
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; i++) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; i++) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double welch_t(const RunningStats& a, const RunningStats& b) {
  if (a.count == 0 || b.count == 0) return 0.0;
  double se2 = a.variance_sample() / static_cast<double>(a.count) +
               b.variance_sample() / static_cast<double>(b.count);
  if (se2 <= 0.0) return 0.0;
  return (a.mean - b.mean) / std::sqrt(se2);
}

}  // namespace spero::stats
