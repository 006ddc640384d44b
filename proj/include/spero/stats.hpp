// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

namespace spero::stats {

// Streaming mean/variance accumulator (Welford update, Chan merge).
// Numerically stable over long streams; merge lets per-chunk accumulators
// combine into one result without revisiting samples.
struct RunningStats {
  uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count++;
    double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    double d = o.mean - mean;
    uint64_t total = count + o.count;
    mean += d * static_cast<double>(o.count) / static_cast<double>(total);
    m2 += o.m2 + d * d * static_cast<double>(count) *
                     static_cast<double>(o.count) / static_cast<double>(total);
    count = total;
  }

  double variance_sample() const {
    return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
  }
  double variance_population() const {
    return count < 1 ? 0.0 : m2 / static_cast<double>(count);
  }
};

// Pearson correlation; returns 0 when either input has zero variance.
double pearson(const double* x, const double* y, size_t n);

// Welch's t statistic between two accumulated groups.  Returns 0 when the
// pooled standard error is zero (e.g. both groups constant).
double welch_t(const RunningStats& a, const RunningStats& b);

}  // namespace spero::stats
