// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spero/attack.hpp"
#include "spero/dataset.hpp"

namespace spero {

enum class AttackKind { DpaDom, Cpa, SecondOrder };
enum class ChannelMode { Power, EM, Combined };

const char* attack_kind_name(AttackKind k);
const char* channel_mode_name(ChannelMode m);

struct AttackSpec {
  AttackKind kind = AttackKind::Cpa;
  ChannelMode mode = ChannelMode::Power;
  int subkey = 0;      // first-order target byte
  int target_bit = 0;  // dpa_dom partition bit
  int pair_i = 0;      // second-order byte pair
  int pair_j = 1;
  // Combined-mode coefficient; when absent it is profiled from the
  // profiling split before the attack runs.
  std::optional<double> alpha;
  SecondOrderConfig second;  // slide/summary/model/engine knobs
  // First-order attacks read only the mapped windows of the target byte
  // instead of full traces; full traces when false.
  bool restrict_windows = true;

  void validate() const;
  std::string describe() const;
};

// Column indices covered by round-1 windows of one state byte.
std::vector<uint32_t> window_columns(const TimeMap& map, int byte_index);

// Dense sample matrix for one channel of a split; samples are dequantized
// and centered on the model offset.  Empty `columns` selects every sample.
TraceMatrix extract_matrix(const SplitData& split, const ChannelModel& model,
                           Trace::Channel channel,
                           const std::vector<uint32_t>& columns);

std::vector<Bytes16> extract_plaintexts(const SplitData& split);

// Binds an attack spec to a set: prepares matrices / window summaries once,
// then scores arbitrary trace subsets cheaply.
class AttackRunner {
 public:
  AttackRunner(const TraceSet& set, const AttackSpec& spec);

  HypothesisScore run(const std::vector<uint32_t>* subset) const;
  bool succeeds(const std::vector<uint32_t>* subset) const;
  uint32_t truth() const { return truth_; }
  size_t available() const { return n_; }
  double alpha_used() const { return alpha_; }

 private:
  AttackSpec spec_;
  size_t n_ = 0;
  uint32_t truth_ = 0;
  double alpha_ = 0.5;
  TraceMatrix first_order_;               // first-order attack data
  std::vector<Bytes16> plaintexts_;
  std::shared_ptr<SecondOrderPrep> prep_;  // second-order summaries
};

// Fraction of R independent uniform n-subsamples (without replacement) of
// the attack split on which the true candidate ranks first.
double success_rate(const AttackSpec& spec, const TraceSet& set, uint64_t n,
                    int repeats, uint64_t seed);

struct MtdResult {
  AttackSpec spec;
  std::vector<uint64_t> grid;
  std::vector<double> rates;  // aligned with grid; NaN where not evaluated
  std::optional<uint64_t> mtd;
  int repeats = 20;
};

// Walks the ascending grid until a trace count reaches rate 1.0 twice (the
// scored batch plus an independent confirmation batch of the same size).
MtdResult mtd(const AttackSpec& spec, const TraceSet& set,
              const std::vector<uint64_t>& grid, int repeats, uint64_t seed);

// Geometric grid from lo to hi, `points_per_decade` values per decade,
// deduplicated after rounding.
std::vector<uint64_t> geometric_grid(uint64_t lo, uint64_t hi,
                                     int points_per_decade = 10);

}  // namespace spero
