// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "spero/attack.hpp"
#include "spero/leakage.hpp"
#include "spero/stats.hpp"

namespace spero {

struct TvlaReport {
  std::vector<double> t;  // per-sample Welch t statistic, fixed minus random
  double max_abs_t = 0.0;
  double threshold = 4.5;
  bool pass = true;  // pass iff max_abs_t <= threshold
  uint64_t n_fixed = 0;
  uint64_t n_random = 0;
};

// Per-sample Welch t between two groups of traces (rows).  Groups need >= 2
// traces each; a sample where both groups are constant reports t = 0.
std::vector<double> welch_t(const TraceMatrix& group_a,
                            const TraceMatrix& group_b);

// Same statistic from pre-accumulated per-sample running stats, used by the
// streaming path.
std::vector<double> welch_t(const std::vector<stats::RunningStats>& a,
                            const std::vector<stats::RunningStats>& b);

TvlaReport make_tvla_report(std::vector<double> t, double threshold,
                            uint64_t n_fixed, uint64_t n_random);

struct TvlaPair {
  TvlaReport power;
  TvlaReport em;
};

// Fixed-vs-random leakage assessment run directly against the simulator:
// traces are generated in interleaved FRFR order (even encryption index =
// fixed plaintext, odd = ciphertext-chained random) and folded into
// streaming accumulators, so memory stays constant in trace count.
TvlaPair tvla_run(const GenConfig& cfg, uint64_t n_fixed, uint64_t n_random,
                  double threshold = 4.5);

}  // namespace spero
