// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spero/leakage.hpp"

namespace spero {

// On-disk layout (all integers little-endian):
//   <dir>/manifest.json                    UTF-8 manifest, schema below
//   <dir>/timemap.json                     JSON array of {op,round,byte,start,end}
//   <dir>/{profiling|attack}/power.traces  magic "SPT1", n:u64, spt:u32,
//   <dir>/{profiling|attack}/em.traces       then n*spt int16 row-major
//   <dir>/{profiling|attack}/meta.bin      2n records: n power rows then n EM
//                                          rows; each record is index:u64,
//                                          plaintext:16B, flags:u8 (bit0 key,
//                                          bit1 masks), key:16B if bit0,
//                                          masks:16B if bit1
// manifest.json carries version, samples_per_trace, sample_dtype ("int16le"),
// channels, counts {profiling, attack} as total traces across both channels,
// masked/key_present/masks_present flags, master_seed, and both channel
// models so codes can be mapped back to volts exactly.
struct Manifest {
  std::string version = "1.0.0";
  uint32_t samples_per_trace = 0;
  std::string sample_dtype = "int16le";
  std::vector<std::string> channels = {"Power", "EM"};
  uint64_t count_profiling = 0;  // total traces (both channels)
  uint64_t count_attack = 0;
  bool masked = false;
  bool key_present = false;
  bool masks_present = false;
  uint64_t master_seed = 0;
  ChannelModel power_model;
  ChannelModel em_model;
};

struct SplitData {
  uint64_t n = 0;  // traces per channel
  std::vector<int16_t> power;  // n * spt, row-major
  std::vector<int16_t> em;
  std::vector<TraceMeta> meta_power;  // one record per trace per channel
  std::vector<TraceMeta> meta_em;
};

struct TraceSet {
  Manifest manifest;
  TimeMap timemap;
  SplitData profiling;
  SplitData attack;

  const SplitData& split(bool attack_split) const {
    return attack_split ? attack : profiling;
  }
};

// Refuses to overwrite a non-empty directory; writes into a temp dir next to
// dir_path and renames, so readers never see a partial set.
void write(const TraceSet& set, const std::string& dir_path);

TraceSet read(const std::string& dir_path);

struct ValidationCheck {
  std::string name;
  bool pass;
  std::string detail;  // names the offending file/offset on failure
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
};

// Total over arbitrary bytes: every failure becomes a named failed check
// (CorruptManifest / SizeMismatch / ChannelMisalignment), never a crash.
ValidationReport validate(const std::string& dir_path);

}  // namespace spero
