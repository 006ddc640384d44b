// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "spero/aes.hpp"
#include "spero/common.hpp"

namespace spero {

// Hamming-weight leakage channel. A mapped intermediate with value v raises
// the window mean to offset + gain*HW(v); everything else sits at offset.
// Gaussian i.i.d. noise is added per sample, then the voltage is quantized to
// quant_bits codes spanning [v_min, v_max].
struct ChannelModel {
  double gain = 0.01;        // volts per HW unit
  double offset = 0.0;       // volts
  double noise_sigma = 0.0;  // volts
  int quant_bits = 12;       // 8 or 12
  double v_min = -1.0;
  double v_max = 1.0;
  double jitter_pct = 0.0;   // stddev of the per-trace shift, fraction of spt

  void validate() const;
  int max_code() const { return (1 << quant_bits) - 1; }
  double lsb() const { return (v_max - v_min) / max_code(); }
};

int16_t quantize(const ChannelModel& ch, double volts);
double dequantize(const ChannelModel& ch, int16_t code);

// Power: unipolar 8-bit [0, 3.3] V. EM: bipolar 12-bit [-1, 1] V.
ChannelModel default_power_model();
ChannelModel default_em_model();

struct TimeWindow {
  OpTag op;
  int round;
  int byte_index;
  uint32_t start;  // [start, end)
  uint32_t end;
};

struct TimeMap {
  uint32_t samples_per_trace = 0;
  std::vector<TimeWindow> windows;

  const TimeWindow* find(OpTag op, int round, int byte_index) const;
  void validate() const;
};

// Round-1 AddRoundKey and Sbox windows for all 16 bytes: 5-sample windows
// with 1-sample guard gaps, centered in the trace.
TimeMap default_timemap(uint32_t samples_per_trace);

struct TraceMeta {
  uint64_t index = 0;
  Bytes16 plaintext{};
  bool has_key = false;
  bool has_masks = false;
  Bytes16 key{};
  Bytes16 masks{};
};

struct Trace {
  enum class Channel { Power, EM };
  Channel channel = Channel::Power;
  std::vector<int16_t> samples;
  TraceMeta meta;
};

// One trace from one execution record. The per-trace jitter shift is
// round(Normal(0, jitter_pct * samples_per_trace)) and displaces every
// window; samples shifted outside the trace are dropped. Deterministic in
// (rec, map, ch, seed).
Trace synthesize_trace(const ExecRecord& rec, const TimeMap& map,
                       const ChannelModel& ch, uint64_t seed);

// Simultaneous acquisition: both channels share one jitter draw; noise draws
// are independent between channels.
std::pair<Trace, Trace> synthesize_dual(const ExecRecord& rec,
                                        const TimeMap& map,
                                        const ChannelModel& power_model,
                                        const ChannelModel& em_model,
                                        uint64_t seed);

enum class PlaintextPolicy {
  UniformRandom,  // fresh random plaintext per encryption
  SweepByte,      // pt[sweep_byte] cycles 0..255; key[sweep_byte] = e/256 when sweep_key_byte
  FixedVsRandom,  // interleaved F,R,F,R...; fixed = fixed_pt; random chains ct -> next pt
};

struct GenConfig {
  KeyBytes key{};
  bool masked = false;
  uint64_t n_profiling = 0;  // encryptions (dual-channel pairs) per split
  uint64_t n_attack = 0;
  PlaintextPolicy policy = PlaintextPolicy::UniformRandom;
  int sweep_byte = 3;
  bool sweep_key_byte = false;
  Bytes16 fixed_pt{};  // defaults to 0xAA repeated; see make_default()
  uint32_t samples_per_trace = 2000;
  ChannelModel power = default_power_model();
  ChannelModel em = default_em_model();
  uint64_t master_seed = 0;
  bool store_key_in_attack = false;

  void validate() const;
  static GenConfig make_default();
};

GenConfig gen_config_from_json_text(const std::string& text);
std::string gen_config_to_json_text(const GenConfig& cfg);

// SPERO shapes: 2000 samples, 256 subkey values x 256 plaintexts at byte 3,
// split 50000/15536 encryptions (100000/31072 traces over both channels).
GenConfig preset_spero_unmasked(uint64_t seed);
GenConfig preset_spero_masked(uint64_t seed);

Bytes16 random_bytes16(std::mt19937_64& rng);

struct TraceSet;  // dataset.hpp
TraceSet generate_dataset(const GenConfig& cfg);

}  // namespace spero
