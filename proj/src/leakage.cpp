// SPDX-License-Identifier: Apache-2.0
#include "spero/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

#include "spero/dataset.hpp"
#include "json_util.hpp"

namespace spero {

using nlohmann::json;

void ChannelModel::validate() const {
  if (noise_sigma < 0) throw ConfigError("noise_sigma must be >= 0");
  if (quant_bits != 8 && quant_bits != 12)
    throw ConfigError("quant_bits must be 8 or 12");
  if (!(v_min < v_max)) throw ConfigError("quant_range requires v_min < v_max");
  if (jitter_pct < 0 || jitter_pct > 0.05)
    throw ConfigError("jitter_pct must be in [0, 0.05]");
}

int16_t quantize(const ChannelModel& ch, double volts) {
  double code = std::llround((volts - ch.v_min) / ch.lsb());
  code = std::clamp(code, 0.0, static_cast<double>(ch.max_code()));
  return static_cast<int16_t>(code);
}

double dequantize(const ChannelModel& ch, int16_t code) {
  return ch.v_min + static_cast<double>(code) * ch.lsb();
}

ChannelModel default_power_model() {
  ChannelModel ch;
  ch.gain = 0.05;
  ch.offset = 0.8;
  ch.noise_sigma = 0.1;
  ch.quant_bits = 8;
  ch.v_min = 0.0;
  ch.v_max = 3.3;
  ch.jitter_pct = 0.0;
  return ch;
}

ChannelModel default_em_model() {
  ChannelModel ch;
  ch.gain = 0.01;
  ch.offset = 0.0;
  ch.noise_sigma = 0.015;
  ch.quant_bits = 12;
  ch.v_min = -1.0;
  ch.v_max = 1.0;
  ch.jitter_pct = 0.0;
  return ch;
}

const TimeWindow* TimeMap::find(OpTag op, int round, int byte_index) const {
  for (const auto& w : windows) {
    if (w.op == op && w.round == round && w.byte_index == byte_index) return &w;
  }
  return nullptr;
}

void TimeMap::validate() const {
  for (const auto& w : windows) {
    if (w.start >= w.end || w.end > samples_per_trace)
      throw ConfigError("time window outside [0, samples_per_trace)");
  }
  for (int i = 0; i < 16; i++) {
    const TimeWindow* a = find(OpTag::SboxOut, 1, i);
    if (!a) continue;
    for (int j = i + 1; j < 16; j++) {
      const TimeWindow* b = find(OpTag::SboxOut, 1, j);
      if (b && a->start < b->end && b->start < a->end)
        throw ConfigError("round-1 SboxOut windows must be disjoint");
    }
  }
}

TimeMap default_timemap(uint32_t spt) {
  constexpr uint32_t kWidth = 5, kGap = 1, kStride = kWidth + kGap;
  constexpr uint32_t kSpan = 32 * kStride;  // 16 ARK + 16 Sbox windows
  if (spt < kSpan)
    throw ConfigError("samples_per_trace too small for the default time map");
  uint32_t base = (spt - kSpan) / 2;
  TimeMap map;
  map.samples_per_trace = spt;
  for (int i = 0; i < 16; i++) {
    uint32_t s = base + kStride * static_cast<uint32_t>(i);
    map.windows.push_back({OpTag::AddRoundKeyOut, 1, i, s, s + kWidth});
  }
  for (int i = 0; i < 16; i++) {
    uint32_t s = base + kStride * static_cast<uint32_t>(16 + i);
    map.windows.push_back({OpTag::SboxOut, 1, i, s, s + kWidth});
  }
  map.validate();
  return map;
}

namespace {

int draw_jitter_shift(const ChannelModel& ch, uint32_t spt, uint64_t seed) {
  if (ch.jitter_pct == 0.0) return 0;
  std::mt19937_64 rng(derive_seed(seed, 0, 0));
  std::normal_distribution<double> dist(0.0, ch.jitter_pct * spt);
  return static_cast<int>(std::llround(dist(rng)));
}

// Window means, then noise over every sample, then quantization.
void synthesize_codes(int16_t* out, const ExecRecord& rec, const TimeMap& map,
                      const ChannelModel& ch, int shift, uint64_t noise_seed) {
  const uint32_t spt = map.samples_per_trace;
  std::vector<double> mean(spt, ch.offset);
  for (const auto& w : map.windows) {
    const ExecEntry* e = rec.find(w.op, w.round, w.byte_index);
    if (!e)
      throw MissingIntermediate(std::string("time map references ") +
                                op_tag_name(w.op) + " round " +
                                std::to_string(w.round) + " byte " +
                                std::to_string(w.byte_index) +
                                " absent from the execution record");
    double m = ch.offset + ch.gain * hamming_weight(e->value);
    int64_t lo = static_cast<int64_t>(w.start) + shift;
    int64_t hi = static_cast<int64_t>(w.end) + shift;
    lo = std::max<int64_t>(lo, 0);
    hi = std::min<int64_t>(hi, spt);
    for (int64_t s = lo; s < hi; s++) mean[static_cast<size_t>(s)] = m;
  }
  if (ch.noise_sigma > 0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> dist(0.0, ch.noise_sigma);
    for (uint32_t s = 0; s < spt; s++) out[s] = quantize(ch, mean[s] + dist(rng));
  } else {
    for (uint32_t s = 0; s < spt; s++) out[s] = quantize(ch, mean[s]);
  }
}

}  // namespace

Trace synthesize_trace(const ExecRecord& rec, const TimeMap& map,
                       const ChannelModel& ch, uint64_t seed) {
  ch.validate();
  Trace t;
  t.samples.resize(map.samples_per_trace);
  int shift = draw_jitter_shift(ch, map.samples_per_trace, seed);
  synthesize_codes(t.samples.data(), rec, map, ch, shift,
                   derive_seed(seed, 1, 0));
  return t;
}

std::pair<Trace, Trace> synthesize_dual(const ExecRecord& rec,
                                        const TimeMap& map,
                                        const ChannelModel& power_model,
                                        const ChannelModel& em_model,
                                        uint64_t seed) {
  power_model.validate();
  em_model.validate();
  Trace p, e;
  p.channel = Trace::Channel::Power;
  e.channel = Trace::Channel::EM;
  p.samples.resize(map.samples_per_trace);
  e.samples.resize(map.samples_per_trace);
  // One jitter draw for both channels (simultaneous acquisition); the power
  // model's jitter_pct governs the shared shift.
  int shift = draw_jitter_shift(power_model, map.samples_per_trace, seed);
  synthesize_codes(p.samples.data(), rec, map, power_model, shift,
                   derive_seed(seed, 1, 0));
  synthesize_codes(e.samples.data(), rec, map, em_model, shift,
                   derive_seed(seed, 1, 1));
  return {std::move(p), std::move(e)};
}

void GenConfig::validate() const {
  power.validate();
  em.validate();
  if (sweep_byte < 0 || sweep_byte > 15)
    throw ConfigError("sweep_byte must be in 0..15");
  default_timemap(samples_per_trace);  // throws if spt cannot host the map
}

GenConfig GenConfig::make_default() {
  GenConfig cfg;
  cfg.fixed_pt.fill(0xAA);
  return cfg;
}

GenConfig preset_spero_unmasked(uint64_t seed) {
  GenConfig cfg = GenConfig::make_default();
  for (int i = 0; i < 16; i++) cfg.key[i] = static_cast<uint8_t>(i);
  cfg.policy = PlaintextPolicy::SweepByte;
  cfg.sweep_byte = 3;
  cfg.sweep_key_byte = true;
  cfg.n_profiling = 50000;
  cfg.n_attack = 15536;
  cfg.samples_per_trace = 2000;
  cfg.master_seed = seed;
  return cfg;
}

GenConfig preset_spero_masked(uint64_t seed) {
  GenConfig cfg = preset_spero_unmasked(seed);
  cfg.masked = true;
  return cfg;
}

Bytes16 random_bytes16(std::mt19937_64& rng) {
  Bytes16 out;
  for (int i = 0; i < 16; i += 8) {
    uint64_t v = rng();
    for (int j = 0; j < 8; j++) out[i + j] = static_cast<uint8_t>(v >> (8 * j));
  }
  return out;
}

TraceSet generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  const uint64_t total = cfg.n_profiling + cfg.n_attack;
  const uint32_t spt = cfg.samples_per_trace;

  TraceSet set;
  set.timemap = default_timemap(spt);
  set.manifest.samples_per_trace = spt;
  set.manifest.count_profiling = 2 * cfg.n_profiling;
  set.manifest.count_attack = 2 * cfg.n_attack;
  set.manifest.masked = cfg.masked;
  set.manifest.key_present = true;
  set.manifest.masks_present = cfg.masked;
  set.manifest.master_seed = cfg.master_seed;
  set.manifest.power_model = cfg.power;
  set.manifest.em_model = cfg.em;

  auto reserve = [&](SplitData& sd, uint64_t n) {
    sd.n = n;
    sd.power.resize(n * spt);
    sd.em.resize(n * spt);
    sd.meta_power.resize(n);
    sd.meta_em.resize(n);
  };
  reserve(set.profiling, cfg.n_profiling);
  reserve(set.attack, cfg.n_attack);

  Bytes16 chain = cfg.fixed_pt;  // FixedVsRandom: random-group chain state
  ExecRecord rec;
  rec.entries.reserve(768);

  for (uint64_t e = 0; e < total; e++) {
    const bool in_attack = e >= cfg.n_profiling;
    SplitData& sd = in_attack ? set.attack : set.profiling;
    const uint64_t row = in_attack ? e - cfg.n_profiling : e;

    std::mt19937_64 meta_rng(derive_seed(cfg.master_seed, 1, e));
    KeyBytes key = cfg.key;
    PlainBytes pt;
    switch (cfg.policy) {
      case PlaintextPolicy::UniformRandom:
        pt = random_bytes16(meta_rng);
        break;
      case PlaintextPolicy::SweepByte:
        pt = random_bytes16(meta_rng);
        pt[cfg.sweep_byte] = static_cast<uint8_t>(e % 256);
        if (cfg.sweep_key_byte)
          key[cfg.sweep_byte] = static_cast<uint8_t>((e / 256) % 256);
        break;
      case PlaintextPolicy::FixedVsRandom:
        if (e % 2 == 0) {
          pt = cfg.fixed_pt;
        } else {
          pt = chain;
        }
        break;
    }

    MaskVector masks{};
    rec.clear();
    CipherBytes ct;
    if (cfg.masked) {
      masks = random_bytes16(meta_rng);
      ct = masked_aes128_encrypt(key, pt, masks, &rec);
    } else {
      ct = aes128_encrypt(key, pt, &rec);
    }
    if (cfg.policy == PlaintextPolicy::FixedVsRandom && e % 2 == 1) chain = ct;

    const uint64_t seed = derive_seed(cfg.master_seed, 2, e);
    int shift = draw_jitter_shift(cfg.power, spt, seed);
    synthesize_codes(sd.power.data() + row * spt, rec, set.timemap, cfg.power,
                     shift, derive_seed(seed, 1, 0));
    synthesize_codes(sd.em.data() + row * spt, rec, set.timemap, cfg.em, shift,
                     derive_seed(seed, 1, 1));

    TraceMeta meta;
    meta.plaintext = pt;
    const bool keep_key = !in_attack || cfg.store_key_in_attack;
    meta.has_key = keep_key;
    if (keep_key) meta.key = key;
    meta.has_masks = cfg.masked && keep_key;
    if (meta.has_masks) meta.masks = masks;
    meta.index = 2 * e;
    sd.meta_power[row] = meta;
    meta.index = 2 * e + 1;
    sd.meta_em[row] = meta;
  }

  set.manifest.key_present = true;
  set.manifest.masks_present = cfg.masked;
  return set;
}

// ---- config (de)serialization ----

using detail::channel_from_json;
using detail::channel_to_json;
using detail::check_keys;

static json gen_config_to_json(const GenConfig& cfg) {
  const char* policy = cfg.policy == PlaintextPolicy::UniformRandom
                           ? "uniform_random"
                           : cfg.policy == PlaintextPolicy::SweepByte
                                 ? "sweep_byte"
                                 : "fixed_vs_random";
  return json{{"key", to_hex(cfg.key)},
              {"masked", cfg.masked},
              {"n_profiling", cfg.n_profiling},
              {"n_attack", cfg.n_attack},
              {"policy", policy},
              {"sweep_byte", cfg.sweep_byte},
              {"sweep_key_byte", cfg.sweep_key_byte},
              {"fixed_pt", to_hex(cfg.fixed_pt)},
              {"samples_per_trace", cfg.samples_per_trace},
              {"power", channel_to_json(cfg.power)},
              {"em", channel_to_json(cfg.em)},
              {"master_seed", cfg.master_seed},
              {"store_key_in_attack", cfg.store_key_in_attack}};
}

static GenConfig gen_config_from_json(const json& j) {
  check_keys(j,
             {"key", "masked", "n_profiling", "n_attack", "policy",
              "sweep_byte", "sweep_key_byte", "fixed_pt", "samples_per_trace",
              "power", "em", "master_seed", "store_key_in_attack"},
             "generator config");
  GenConfig cfg = GenConfig::make_default();
  if (j.contains("key")) cfg.key = bytes16_from_hex(j.at("key").get<std::string>());
  if (j.contains("masked")) cfg.masked = j.at("masked").get<bool>();
  if (j.contains("n_profiling")) cfg.n_profiling = j.at("n_profiling").get<uint64_t>();
  if (j.contains("n_attack")) cfg.n_attack = j.at("n_attack").get<uint64_t>();
  if (j.contains("policy")) {
    std::string p = j.at("policy").get<std::string>();
    if (p == "uniform_random") cfg.policy = PlaintextPolicy::UniformRandom;
    else if (p == "sweep_byte") cfg.policy = PlaintextPolicy::SweepByte;
    else if (p == "fixed_vs_random") cfg.policy = PlaintextPolicy::FixedVsRandom;
    else throw ConfigError("unknown plaintext policy '" + p + "'");
  }
  if (j.contains("sweep_byte")) cfg.sweep_byte = j.at("sweep_byte").get<int>();
  if (j.contains("sweep_key_byte"))
    cfg.sweep_key_byte = j.at("sweep_key_byte").get<bool>();
  if (j.contains("fixed_pt"))
    cfg.fixed_pt = bytes16_from_hex(j.at("fixed_pt").get<std::string>());
  if (j.contains("samples_per_trace"))
    cfg.samples_per_trace = j.at("samples_per_trace").get<uint32_t>();
  if (j.contains("power")) cfg.power = channel_from_json(j.at("power"));
  if (j.contains("em")) cfg.em = channel_from_json(j.at("em"));
  if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<uint64_t>();
  if (j.contains("store_key_in_attack"))
    cfg.store_key_in_attack = j.at("store_key_in_attack").get<bool>();
  cfg.validate();
  return cfg;
}

GenConfig gen_config_from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("generator config is not valid JSON");
  return gen_config_from_json(j);
}

std::string gen_config_to_json_text(const GenConfig& cfg) {
  return gen_config_to_json(cfg).dump(2) + "\n";
}

}  // namespace spero
