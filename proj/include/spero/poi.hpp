// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spero/attack.hpp"
#include "spero/common.hpp"

namespace spero {

// Per-sample signal-to-noise ratio over labeled traces: variance of the
// class means (population, across labels) divided by the mean within-class
// sample variance.  Labels with fewer than 2 traces are dropped; fewer than
// 2 usable labels is an error.  A zero noise denominator yields +inf.
std::vector<double> snr(const TraceMatrix& traces,
                        const std::vector<int>& labels);

// Plug-in histogram mutual information in nats.  Each variable is binned
// into `bins` equal-width bins over its observed range (a constant vector
// collapses to one bin).
double mutual_information(const std::vector<double>& x,
                          const std::vector<double>& y, int bins = 16);

// Empirical entropy in nats under the same binning.
double entropy(const std::vector<double>& x, int bins = 16);

struct FeatureRanking {
  struct Entry {
    uint32_t sample_index;
    double relevance;  // MI(feature, label)
    double adjusted;   // relevance minus mean redundancy at selection time
  };
  std::vector<Entry> entries;
};

// Greedy mRMR: first pick maximizes MI(feature, label); later picks maximize
// MI(f, label) - (1/|S|) * sum over selected s of MI(f, s).  Ties take the
// lower sample index.
FeatureRanking mrmr_select(const TraceMatrix& features,
                           const std::vector<double>& labels, int k,
                           int bins = 16);

std::string feature_ranking_csv(const FeatureRanking& r);

}  // namespace spero
