// SPDX-License-Identifier: Apache-2.0
#include "spero/rt_emulator.hpp"

#include <algorithm>
#include <cstdlib>

#include "spero/aes.hpp"
#include "spero/poi.hpp"

namespace spero {

RtDpaAccumulator::RtDpaAccumulator(std::vector<uint32_t> feature_indices,
                                   int subkey_index, int target_bit,
                                   int int_width)
    : features_(std::move(feature_indices)),
      subkey_(subkey_index),
      bit_(target_bit),
      int_width_(int_width) {
  if (features_.empty()) throw ConfigError("feature budget must be >= 1");
  if (subkey_ < 0 || subkey_ > 15) throw ConfigError("subkey out of range");
  if (bit_ < 0 || bit_ > 7) throw ConfigError("target_bit out of range");
  if (int_width_ != 32 && int_width_ != 64)
    throw ConfigError("int_width must be 32 or 64");
  max_traces_ = int_width_ == 64 ? (1ull << 20) : (1ull << 18);
  count_.assign(256 * 2, 0);
  sum_.assign(256 * 2 * features_.size(), 0);
}

void RtDpaAccumulator::stream_trace(const std::vector<int16_t>& features,
                                    const Bytes16& plaintext) {
  if (features.size() != features_.size())
    throw LengthMismatch("trace feature count does not match budget");
  if (traces_ >= max_traces_)
    throw Overflow("trace budget exhausted for declared integer width");
  for (int16_t code : features) {
    if (code > 4096 || code < -4096)
      throw Overflow("sample code outside +/-2^12 budget");
  }
  const size_t nf = features_.size();
  const uint8_t pt = plaintext[subkey_];
  for (int g = 0; g < 256; g++) {
    int group = (kSbox[pt ^ g] >> bit_) & 1;
    count_[g * 2 + group]++;
    int64_t* dst = sum_.data() + (g * 2 + group) * nf;
    for (size_t f = 0; f < nf; f++) dst[f] += features[f];
  }
  traces_++;
}

RtDpaAccumulator::GuessStat RtDpaAccumulator::guess_stat(int guess) const {
  const size_t nf = features_.size();
  int64_t c0 = count_[guess * 2 + 0];
  int64_t c1 = count_[guess * 2 + 1];
  if (c0 == 0 || c1 == 0) return {0, 0};
  const int64_t* s0 = sum_.data() + (guess * 2 + 0) * nf;
  const int64_t* s1 = sum_.data() + (guess * 2 + 1) * nf;
  // |sum| <= 2^32, counts <= 2^20: the cross products stay within 2^52.
  int64_t best = 0;
  for (size_t f = 0; f < nf; f++) {
    int64_t num = std::llabs(s1[f] * c0 - s0[f] * c1);
    if (num > best) best = num;
  }
  return {best, c1 * c0};
}

HypothesisScore RtDpaAccumulator::rank_without_division() const {
  std::vector<GuessStat> stats(256);
  for (int g = 0; g < 256; g++) stats[g] = guess_stat(g);

  HypothesisScore out;
  out.order = AttackOrder::First;
  out.scores.assign(256, 0.0);
  out.degenerate.assign(256, 0);
  for (int g = 0; g < 256; g++) {
    if (stats[g].den == 0)
      out.degenerate[g] = 1;
    else
      out.scores[g] = static_cast<double>(stats[g].num) /
                      static_cast<double>(stats[g].den);
  }

  out.ranking.resize(256);
  for (uint32_t g = 0; g < 256; g++) out.ranking[g] = g;
  std::sort(out.ranking.begin(), out.ranking.end(),
            [&](uint32_t a, uint32_t b) {
              const GuessStat& ga = stats[a];
              const GuessStat& gb = stats[b];
              if ((ga.den == 0) != (gb.den == 0)) return gb.den == 0;
              if (ga.den == 0) return a < b;
              // num_a/den_a vs num_b/den_b without dividing
              __int128 lhs = static_cast<__int128>(ga.num) * gb.den;
              __int128 rhs = static_cast<__int128>(gb.num) * ga.den;
              if (lhs != rhs) return lhs > rhs;
              return a < b;
            });
  out.best = out.ranking[0];
  return out;
}

size_t RtDpaAccumulator::footprint_bytes() const {
  return sizeof(*this) + features_.capacity() * sizeof(uint32_t) +
         count_.capacity() * sizeof(uint32_t) +
         sum_.capacity() * sizeof(int64_t);
}

std::vector<uint32_t> rt_select_features(const TraceSet& set,
                                         Trace::Channel channel, int subkey,
                                         int budget, size_t max_rows,
                                         int bins) {
  if (budget < 1) throw ConfigError("feature budget must be >= 1");
  const SplitData& prof = set.profiling;
  if (!set.manifest.key_present)
    throw MissingKey("feature selection needs the profiling key");
  const size_t n = std::min<size_t>(prof.n, max_rows);
  if (n < 4) throw InsufficientTraces("too few profiling traces");
  const uint32_t spt = set.manifest.samples_per_trace;
  const std::vector<int16_t>& src =
      channel == Trace::Channel::Power ? prof.power : prof.em;

  std::vector<double> labels(n);
  for (size_t t = 0; t < n; t++) {
    const TraceMeta& meta = prof.meta_power[t];
    if (!meta.has_key) throw MissingKey("profiling trace lacks key bytes");
    labels[t] = hamming_weight(kSbox[meta.plaintext[subkey] ^
                                     meta.key[subkey]]);
  }

  // Relevance pre-filter: rank every column by MI with the label, keep a
  // short list, then run the greedy redundancy-aware pass on that list.
  std::vector<double> col(n);
  std::vector<std::pair<double, uint32_t>> rel(spt);
  for (uint32_t s = 0; s < spt; s++) {
    for (size_t t = 0; t < n; t++) col[t] = src[t * spt + s];
    rel[s] = {mutual_information(col, labels, bins), s};
  }
  std::stable_sort(rel.begin(), rel.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  size_t shortlist = std::min<size_t>(
      spt, std::max<size_t>(static_cast<size_t>(4) * budget, 128));
  std::vector<uint32_t> cand(shortlist);
  for (size_t i = 0; i < shortlist; i++) cand[i] = rel[i].second;
  std::sort(cand.begin(), cand.end());

  TraceMatrix m;
  m.resize(n, shortlist);
  for (size_t t = 0; t < n; t++) {
    double* row = m.row(t);
    for (size_t i = 0; i < shortlist; i++) row[i] = src[t * spt + cand[i]];
  }
  int k = std::min<int>(budget, static_cast<int>(shortlist));
  FeatureRanking ranking = mrmr_select(m, labels, k, bins);
  std::vector<uint32_t> out;
  for (const auto& e : ranking.entries) out.push_back(cand[e.sample_index]);
  return out;
}

}  // namespace spero
