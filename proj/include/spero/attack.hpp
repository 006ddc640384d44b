// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "spero/common.hpp"
#include "spero/dataset.hpp"
#include "spero/leakage.hpp"

namespace spero {

enum class AttackOrder { First, Second };

// Result of a key-hypothesis search.  First-order searches score 256
// candidates; second-order searches score 65536, indexed k_i*256 + k_j.
// Scores are absolute statistics (difference of means or |Pearson|), so
// larger is always stronger.
struct HypothesisScore {
  AttackOrder order = AttackOrder::First;
  std::vector<double> scores;
  std::vector<uint32_t> ranking;  // candidates sorted by descending score,
                                  // ties broken by lower index
  uint32_t best = 0;
  std::vector<uint8_t> degenerate;  // 1 where a guess had an empty partition
                                    // or zero-variance data (score forced 0)

  // Rebuilds ranking/best from scores.  Degenerate candidates sort by the
  // same (score, index) rule; their scores are already 0.
  void finalize();
  bool any_degenerate() const;
  // rank of a candidate (0 = best)
  uint32_t rank_of(uint32_t candidate) const;
};

// Row-major matrix of trace samples (possibly a column subset).
struct TraceMatrix {
  size_t n = 0;
  size_t width = 0;
  std::vector<double> data;

  double* row(size_t i) { return data.data() + i * width; }
  const double* row(size_t i) const { return data.data() + i * width; }
  void resize(size_t rows, size_t cols) {
    n = rows;
    width = cols;
    data.assign(rows * cols, 0.0);
  }
};

// Difference-of-means DPA on one subkey byte.  Traces are partitioned per
// guess by bit `target_bit` of sbox(pt[subkey_index] ^ guess); the score is
// the largest per-sample |mean1 - mean0|.  A guess whose partition leaves a
// group empty scores 0 and is flagged degenerate.
HypothesisScore dpa_dom(const TraceMatrix& traces,
                        const std::vector<Bytes16>& plaintexts,
                        int subkey_index, int target_bit);

// Correlation attack: score[k] = max over samples of
// |Pearson(HW(sbox(pt ^ k)), column)|.  Zero-variance columns or constant
// hypothesis vectors contribute 0.
HypothesisScore cpa(const TraceMatrix& traces,
                    const std::vector<Bytes16>& plaintexts, int subkey_index);

// Absolute-difference combination of two equal-length windows of one trace:
// out[t] = ||x_i[t]| - |x_j[t]||.  Windows must not overlap.
std::vector<double> abs_diff_preprocess(const double* trace, size_t trace_len,
                                        const TimeWindow& win_i,
                                        const TimeWindow& win_j);

// AZ = alpha*AP + (1-alpha)*AEM, elementwise.
std::vector<double> fuse(const std::vector<double>& ap,
                         const std::vector<double>& aem, double alpha);

struct FusionConfig {
  double alpha = 0.5;
  double grid_step = 0.01;
};

enum class SecondOrderMode { Power, EM, Combined };

// Per-trace compression of the combined window before correlating.
enum class SummaryKind { WindowMean, PerOffsetMax };

// Hypothesis for the pair (k_i, k_j): full-byte HW(sbox_i ^ sbox_j), or a
// single bit of that XOR.
enum class HypothesisModel { FullByteHW, SingleBit };

// Transform evaluates all 65536 candidates through Walsh-Hadamard
// class-sum convolution (exact up to float rounding); Direct loops over
// candidates and traces.  Both produce the same statistics.
enum class ScoreEngine { Transform, Direct };

struct SecondOrderConfig {
  SecondOrderMode mode = SecondOrderMode::Combined;
  FusionConfig fusion;
  int slide = 2;  // offset search +/- samples applied to window j
  SummaryKind summary = SummaryKind::WindowMean;
  HypothesisModel model = HypothesisModel::FullByteHW;
  int single_bit = 0;
  ScoreEngine engine = ScoreEngine::Transform;
};

// Window summaries extracted once per (set, pair, mode); scoring can then be
// repeated over trace subsets without touching raw samples again.
struct SecondOrderPrep {
  size_t n = 0;
  int n_deltas = 1;
  int byte_i = 0, byte_j = 1;
  std::vector<uint8_t> pt_i, pt_j;  // plaintext bytes at positions i and j
  std::vector<double> summary;      // n x n_deltas, row-major
};

SecondOrderPrep second_order_prepare(const SplitData& split,
                                     const Manifest& manifest,
                                     const TimeMap& map, int byte_i,
                                     int byte_j,
                                     const SecondOrderConfig& cfg);

// Scores all 65536 (k_i, k_j) candidates from prepared summaries.  `subset`
// (row indices into prep) selects a subsample; null means all traces.
HypothesisScore second_order_score(const SecondOrderPrep& prep,
                                   const std::vector<uint32_t>* subset,
                                   const SecondOrderConfig& cfg);

// Full second-order attack over the attack split of `set`.
HypothesisScore second_order_attack(const TraceSet& set, int byte_i,
                                    int byte_j, SecondOrderMode mode,
                                    const SecondOrderConfig& cfg = {});

// Profiled choice of the fusion coefficient: grid-search alpha maximizing
// |Pearson| between fused window summaries and the true-key pair hypothesis
// on the profiling split (rigid alignment, delta = 0).  Ties take the
// smaller alpha.
double select_alpha(const TraceSet& set, int byte_i, int byte_j,
                    const FusionConfig& cfg = {});

}  // namespace spero
