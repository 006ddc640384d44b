// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "spero/attack.hpp"
#include "spero/common.hpp"
#include "spero/dataset.hpp"

namespace spero {

// Integer-only difference-of-means DPA sized for an on-device pipeline:
// per key guess and partition bit group it keeps one count and one 64-bit
// sum per budgeted feature, so memory is constant in the number of traces
// and no division or floating point is needed until reporting.
//
// Declared operating budget: at most 2^20 traces (2^18 when int_width is
// 32) with |code| <= 2^12; stream_trace enforces it with checked
// arithmetic and throws Overflow beyond.
class RtDpaAccumulator {
 public:
  RtDpaAccumulator(std::vector<uint32_t> feature_indices, int subkey_index,
                   int target_bit, int int_width = 64);

  // Consumes one trace restricted to the budgeted features (same order as
  // feature_indices).
  void stream_trace(const std::vector<int16_t>& features,
                    const Bytes16& plaintext);

  // Ranks guesses by |mean1 - mean0| at each guess's best feature, using
  // exact integer cross-multiplication only.  A guess with an empty bit
  // group is flagged degenerate and ranks after every complete guess.
  HypothesisScore rank_without_division() const;

  uint64_t traces_consumed() const { return traces_; }
  const std::vector<uint32_t>& feature_indices() const { return features_; }
  size_t footprint_bytes() const;

  // Exact comparison key for one guess: (|s1*c0 - s0*c1|, c1*c0) at the
  // best feature.  Lets tests distinguish exact ties from mismatches.
  struct GuessStat {
    int64_t num = 0;   // |s1*c0 - s0*c1|
    int64_t den = 0;   // c1*c0; 0 marks an empty group
  };
  GuessStat guess_stat(int guess) const;

 private:
  std::vector<uint32_t> features_;
  int subkey_;
  int bit_;
  int int_width_;
  uint64_t traces_ = 0;
  uint64_t max_traces_;
  std::vector<uint32_t> count_;  // 256 x 2
  std::vector<int64_t> sum_;     // 256 x 2 x n_features
};

// mRMR-driven feature choice for the emulator, computed on the profiling
// split with the true key.  Columns are pre-filtered by relevance before
// the greedy pass to keep the search tractable on long traces.
std::vector<uint32_t> rt_select_features(const TraceSet& set,
                                         Trace::Channel channel, int subkey,
                                         int budget, size_t max_rows = 10000,
                                         int bins = 16);

}  // namespace spero
