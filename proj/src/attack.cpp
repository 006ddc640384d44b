// SPDX-License-Identifier: Apache-2.0
#include "spero/attack.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <mutex>

#include "spero/aes.hpp"

namespace spero {

void HypothesisScore::finalize() {
  ranking.resize(scores.size());
  for (uint32_t i = 0; i < ranking.size(); i++) ranking[i] = i;
  std::sort(ranking.begin(), ranking.end(), [&](uint32_t a, uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  best = ranking.empty() ? 0 : ranking[0];
}

bool HypothesisScore::any_degenerate() const {
  return std::find(degenerate.begin(), degenerate.end(), uint8_t{1}) !=
         degenerate.end();
}

uint32_t HypothesisScore::rank_of(uint32_t candidate) const {
  for (uint32_t r = 0; r < ranking.size(); r++)
    if (ranking[r] == candidate) return r;
  throw ConfigError("candidate out of range");
}

HypothesisScore dpa_dom(const TraceMatrix& traces,
                        const std::vector<Bytes16>& plaintexts,
                        int subkey_index, int target_bit) {
  if (traces.n < 2) throw InsufficientTraces("dpa_dom needs at least 2 traces");
  if (plaintexts.size() != traces.n)
    throw LengthMismatch("plaintext count does not match trace count");
  if (subkey_index < 0 || subkey_index > 15)
    throw ConfigError("subkey_index out of range");
  if (target_bit < 0 || target_bit > 7)
    throw ConfigError("target_bit out of range");

  const size_t n = traces.n, w = traces.width;
  HypothesisScore out;
  out.order = AttackOrder::First;
  out.scores.assign(256, 0.0);
  out.degenerate.assign(256, 0);

  std::vector<uint8_t> pt_byte(n);
  for (size_t t = 0; t < n; t++) pt_byte[t] = plaintexts[t][subkey_index];

  std::vector<double> sum1(w), sum0(w);
  for (int k = 0; k < 256; k++) {
    std::fill(sum1.begin(), sum1.end(), 0.0);
    std::fill(sum0.begin(), sum0.end(), 0.0);
    size_t c1 = 0, c0 = 0;
    for (size_t t = 0; t < n; t++) {
      const double* row = traces.row(t);
      if ((kSbox[pt_byte[t] ^ k] >> target_bit) & 1) {
        c1++;
        for (size_t s = 0; s < w; s++) sum1[s] += row[s];
      } else {
        c0++;
        for (size_t s = 0; s < w; s++) sum0[s] += row[s];
      }
    }
    if (c0 == 0 || c1 == 0) {
      out.degenerate[k] = 1;
      continue;
    }
    double best = 0.0;
    for (size_t s = 0; s < w; s++) {
      double d = std::fabs(sum1[s] / static_cast<double>(c1) -
                           sum0[s] / static_cast<double>(c0));
      if (d > best) best = d;
    }
    out.scores[k] = best;
  }
  out.finalize();
  return out;
}

HypothesisScore cpa(const TraceMatrix& traces,
                    const std::vector<Bytes16>& plaintexts, int subkey_index) {
  if (traces.n < 3) throw InsufficientTraces("cpa needs at least 3 traces");
  if (plaintexts.size() != traces.n)
    throw LengthMismatch("plaintext count does not match trace count");
  if (subkey_index < 0 || subkey_index > 15)
    throw ConfigError("subkey_index out of range");

  const size_t n = traces.n, w = traces.width;
  const double dn = static_cast<double>(n);
  HypothesisScore out;
  out.order = AttackOrder::First;
  out.scores.assign(256, 0.0);
  out.degenerate.assign(256, 0);

  std::vector<uint8_t> pt_byte(n);
  for (size_t t = 0; t < n; t++) pt_byte[t] = plaintexts[t][subkey_index];

  std::vector<double> sx(w, 0.0), sxx(w, 0.0), sxh(w);
  for (size_t t = 0; t < n; t++) {
    const double* row = traces.row(t);
    for (size_t s = 0; s < w; s++) {
      sx[s] += row[s];
      sxx[s] += row[s] * row[s];
    }
  }

  for (int k = 0; k < 256; k++) {
    std::fill(sxh.begin(), sxh.end(), 0.0);
    double sh = 0.0, sh2 = 0.0;
    for (size_t t = 0; t < n; t++) {
      double h = hamming_weight(kSbox[pt_byte[t] ^ k]);
      sh += h;
      sh2 += h * h;
      const double* row = traces.row(t);
      for (size_t s = 0; s < w; s++) sxh[s] += h * row[s];
    }
    double hvar = dn * sh2 - sh * sh;
    if (hvar <= 0.0) {
      out.degenerate[k] = 1;
      continue;
    }
    double best = 0.0;
    for (size_t s = 0; s < w; s++) {
      double xvar = dn * sxx[s] - sx[s] * sx[s];
      if (xvar <= 0.0) continue;
      double rho = std::fabs((dn * sxh[s] - sh * sx[s]) /
                             std::sqrt(hvar * xvar));
      if (rho > best) best = rho;
    }
    out.scores[k] = best;
  }
  out.finalize();
  return out;
}

std::vector<double> abs_diff_preprocess(const double* trace, size_t trace_len,
                                        const TimeWindow& win_i,
                                        const TimeWindow& win_j) {
  uint32_t li = win_i.end - win_i.start;
  uint32_t lj = win_j.end - win_j.start;
  if (li != lj)
    throw LengthMismatch("window lengths differ: " + std::to_string(li) +
                         " vs " + std::to_string(lj));
  if (win_i.start < win_j.end && win_j.start < win_i.end)
    throw WindowOverlap("windows [" + std::to_string(win_i.start) + "," +
                        std::to_string(win_i.end) + ") and [" +
                        std::to_string(win_j.start) + "," +
                        std::to_string(win_j.end) + ") overlap");
  if (win_i.end > trace_len || win_j.end > trace_len)
    throw ConfigError("window exceeds trace length");
  std::vector<double> out(li);
  for (uint32_t t = 0; t < li; t++) {
    out[t] = std::fabs(std::fabs(trace[win_i.start + t]) -
                       std::fabs(trace[win_j.start + t]));
  }
  return out;
}

std::vector<double> fuse(const std::vector<double>& ap,
                         const std::vector<double>& aem, double alpha) {
  if (ap.size() != aem.size())
    throw LengthMismatch("fuse inputs differ in length");
  std::vector<double> out(ap.size());
  for (size_t i = 0; i < ap.size(); i++)
    out[i] = alpha * ap[i] + (1.0 - alpha) * aem[i];
  return out;
}

namespace {

void validate_second_order_cfg(const SecondOrderConfig& cfg) {
  if (cfg.fusion.alpha < 0.0 || cfg.fusion.alpha > 1.0)
    throw ConfigError("alpha must lie in [0,1]");
  if (cfg.slide < 0) throw ConfigError("slide must be >= 0");
  if (cfg.model == HypothesisModel::SingleBit &&
      (cfg.single_bit < 0 || cfg.single_bit > 7))
    throw ConfigError("single_bit out of range");
}

struct PairWindows {
  const TimeWindow* wi;
  const TimeWindow* wj;
  uint32_t len;
};

PairWindows locate_pair_windows(const TimeMap& map, int byte_i, int byte_j) {
  const TimeWindow* wi = map.find(OpTag::SboxOut, 1, byte_i);
  const TimeWindow* wj = map.find(OpTag::SboxOut, 1, byte_j);
  if (!wi || !wj)
    throw MissingWindow("round-1 SboxOut window missing for byte " +
                        std::to_string(!wi ? byte_i : byte_j));
  uint32_t li = wi->end - wi->start, lj = wj->end - wj->start;
  if (li != lj) throw LengthMismatch("pair windows differ in length");
  if (wi->start < wj->end && wj->start < wi->end)
    throw WindowOverlap("pair windows overlap");
  return {wi, wj, li};
}

// hypothesis value for sbox outputs u, v
inline double hyp_value(uint8_t u, uint8_t v, const SecondOrderConfig& cfg) {
  uint8_t x = u ^ v;
  if (cfg.model == HypothesisModel::SingleBit)
    return (x >> cfg.single_bit) & 1;
  return hamming_weight(x);
}

// In-place Walsh-Hadamard transform; self-inverse up to a factor of size().
void fwht(std::vector<double>& a) {
  const size_t n = a.size();
  for (size_t len = 1; len < n; len <<= 1) {
    for (size_t i = 0; i < n; i += len << 1) {
      for (size_t j = i; j < i + len; j++) {
        double u = a[j], v = a[j + len];
        a[j] = u + v;
        a[j + len] = u - v;
      }
    }
  }
}

// XOR cross-correlation: out[m] = sum_i k[i] * x[i^m].
std::vector<double> xor_correlate(const std::vector<double>& k_hat,
                                  std::vector<double> x) {
  fwht(x);
  for (size_t i = 0; i < x.size(); i++) x[i] *= k_hat[i];
  fwht(x);
  double inv = 1.0 / static_cast<double>(x.size());
  for (double& v : x) v *= inv;
  return x;
}

struct KernelWht {
  std::vector<double> k_hat;   // WHT of h(r,s)
  std::vector<double> k2_hat;  // WHT of h(r,s)^2
};

KernelWht build_kernel_wht(const SecondOrderConfig& cfg) {
  KernelWht kw;
  kw.k_hat.resize(65536);
  kw.k2_hat.resize(65536);
  for (int r = 0; r < 256; r++) {
    for (int s = 0; s < 256; s++) {
      double h = hyp_value(kSbox[r], kSbox[s], cfg);
      kw.k_hat[(r << 8) | s] = h;
      kw.k2_hat[(r << 8) | s] = h * h;
    }
  }
  fwht(kw.k_hat);
  fwht(kw.k2_hat);
  return kw;
}

const KernelWht& kernel_wht_for(const SecondOrderConfig& cfg) {
  if (cfg.model == HypothesisModel::FullByteHW) {
    static KernelWht full = build_kernel_wht(SecondOrderConfig{});
    return full;
  }
  static std::array<std::unique_ptr<KernelWht>, 8> bits;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = bits[cfg.single_bit];
  if (!slot) slot = std::make_unique<KernelWht>(build_kernel_wht(cfg));
  return *slot;
}

// 1/stddev over all entries; 0 for a constant stream so that a flat channel
// drops out of a fused combination instead of poisoning it.
double inverse_pooled_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  double n = static_cast<double>(v.size());
  double var = s2 / n - (s / n) * (s / n);
  return var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
}

}  // namespace

SecondOrderPrep second_order_prepare(const SplitData& split,
                                     const Manifest& manifest,
                                     const TimeMap& map, int byte_i,
                                     int byte_j,
                                     const SecondOrderConfig& cfg) {
  validate_second_order_cfg(cfg);
  if (byte_i < 0 || byte_i > 15 || byte_j < 0 || byte_j > 15 ||
      byte_i == byte_j)
    throw ConfigError("pair bytes must be distinct indices in 0..15");
  PairWindows pw = locate_pair_windows(map, byte_i, byte_j);
  const uint32_t spt = map.samples_per_trace;
  const int slide = cfg.slide;
  if (pw.wj->start < static_cast<uint32_t>(slide) ||
      pw.wj->end + static_cast<uint32_t>(slide) > spt)
    throw ConfigError("slide extends window j past the trace edge");

  const bool need_power = cfg.mode != SecondOrderMode::EM;
  const bool need_em = cfg.mode != SecondOrderMode::Power;
  const double alpha = cfg.fusion.alpha;
  const uint32_t len = pw.len;
  const int d_count = 2 * slide + 1;

  SecondOrderPrep prep;
  prep.n = split.n;
  prep.n_deltas = d_count;
  prep.byte_i = byte_i;
  prep.byte_j = byte_j;
  prep.pt_i.resize(split.n);
  prep.pt_j.resize(split.n);
  prep.summary.assign(split.n * d_count, 0.0);

  const bool combined = cfg.mode == SecondOrderMode::Combined;
  // Combined mode compresses each channel separately, rescales both streams
  // to unit variance and only then mixes with alpha, so the coefficient
  // weighs information content instead of raw volt scale.
  std::vector<double> sum_p, sum_e;
  if (combined) {
    sum_p.assign(split.n * d_count, 0.0);
    sum_e.assign(split.n * d_count, 0.0);
  }

  std::vector<double> xi_p(len), xj_p(len + 2 * slide);
  std::vector<double> xi_e(len), xj_e(len + 2 * slide);
  for (size_t t = 0; t < split.n; t++) {
    prep.pt_i[t] = split.meta_power[t].plaintext[byte_i];
    prep.pt_j[t] = split.meta_power[t].plaintext[byte_j];
    const int16_t* prow = split.power.data() + t * spt;
    const int16_t* erow = split.em.data() + t * spt;
    if (need_power) {
      const ChannelModel& pm = manifest.power_model;
      for (uint32_t s = 0; s < len; s++)
        xi_p[s] = std::fabs(dequantize(pm, prow[pw.wi->start + s]) - pm.offset);
      for (uint32_t s = 0; s < len + 2 * slide; s++)
        xj_p[s] =
            std::fabs(dequantize(pm, prow[pw.wj->start - slide + s]) -
                      pm.offset);
    }
    if (need_em) {
      const ChannelModel& em = manifest.em_model;
      for (uint32_t s = 0; s < len; s++)
        xi_e[s] = std::fabs(dequantize(em, erow[pw.wi->start + s]) - em.offset);
      for (uint32_t s = 0; s < len + 2 * slide; s++)
        xj_e[s] =
            std::fabs(dequantize(em, erow[pw.wj->start - slide + s]) -
                      em.offset);
    }
    for (int d = 0; d < d_count; d++) {
      const bool mean_kind = cfg.summary == SummaryKind::WindowMean;
      double acc_p = mean_kind ? 0.0 : -std::numeric_limits<double>::infinity();
      double acc_e = acc_p;
      for (uint32_t s = 0; s < len; s++) {
        if (need_power) {
          double ap = std::fabs(xi_p[s] - xj_p[s + d]);
          if (mean_kind)
            acc_p += ap;
          else
            acc_p = std::max(acc_p, ap);
        }
        if (need_em) {
          double ae = std::fabs(xi_e[s] - xj_e[s + d]);
          if (mean_kind)
            acc_e += ae;
          else
            acc_e = std::max(acc_e, ae);
        }
      }
      if (mean_kind) {
        acc_p /= static_cast<double>(len);
        acc_e /= static_cast<double>(len);
      }
      size_t slot = t * d_count + d;
      if (combined) {
        sum_p[slot] = acc_p;
        sum_e[slot] = acc_e;
      } else {
        prep.summary[slot] = cfg.mode == SecondOrderMode::Power ? acc_p : acc_e;
      }
    }
  }

  if (combined) {
    double wp = inverse_pooled_std(sum_p);
    double we = inverse_pooled_std(sum_e);
    for (size_t k = 0; k < prep.summary.size(); k++)
      prep.summary[k] =
          alpha * sum_p[k] * wp + (1.0 - alpha) * sum_e[k] * we;
  }
  return prep;
}

HypothesisScore second_order_score(const SecondOrderPrep& prep,
                                   const std::vector<uint32_t>* subset,
                                   const SecondOrderConfig& cfg) {
  validate_second_order_cfg(cfg);
  const int d_count = prep.n_deltas;
  size_t n = subset ? subset->size() : prep.n;
  if (n < 3) throw InsufficientTraces("second-order scoring needs >= 3 traces");
  const double dn = static_cast<double>(n);

  // Per-delta totals of the summaries, shared by every candidate.
  std::vector<double> s_sum(d_count, 0.0), s_sum2(d_count, 0.0);
  auto row_index = [&](size_t r) { return subset ? (*subset)[r] : r; };
  for (size_t r = 0; r < n; r++) {
    const double* srow = prep.summary.data() + row_index(r) * d_count;
    for (int d = 0; d < d_count; d++) {
      s_sum[d] += srow[d];
      s_sum2[d] += srow[d] * srow[d];
    }
  }
  std::vector<double> s_var(d_count);
  for (int d = 0; d < d_count; d++)
    s_var[d] = dn * s_sum2[d] - s_sum[d] * s_sum[d];

  HypothesisScore out;
  out.order = AttackOrder::Second;
  out.scores.assign(65536, 0.0);
  out.degenerate.assign(65536, 0);

  // Guard against tiny negative variance terms produced by transform
  // round-off; anything below this is treated as constant-hypothesis.
  const double h_eps = 1e-9 * 64.0 * dn * dn;

  if (cfg.engine == ScoreEngine::Transform) {
    // Class sums over the (pt_i, pt_j) byte pair collapse the trace loop:
    // every per-candidate total becomes an XOR correlation with the
    // hypothesis kernel, evaluated for all 65536 candidates at once.
    std::vector<double> counts(65536, 0.0);
    std::vector<std::vector<double>> m_sum(
        d_count, std::vector<double>(65536, 0.0));
    for (size_t r = 0; r < n; r++) {
      size_t t = row_index(r);
      size_t idx = (static_cast<size_t>(prep.pt_i[t]) << 8) | prep.pt_j[t];
      counts[idx] += 1.0;
      const double* srow = prep.summary.data() + t * d_count;
      for (int d = 0; d < d_count; d++) m_sum[d][idx] += srow[d];
    }
    const KernelWht& kw = kernel_wht_for(cfg);
    std::vector<double> h_sum = xor_correlate(kw.k_hat, counts);
    std::vector<double> h_sum2 = xor_correlate(kw.k2_hat, std::move(counts));
    std::vector<std::vector<double>> hs(d_count);
    for (int d = 0; d < d_count; d++)
      hs[d] = xor_correlate(kw.k_hat, std::move(m_sum[d]));
    for (size_t m = 0; m < 65536; m++) {
      double hvar = dn * h_sum2[m] - h_sum[m] * h_sum[m];
      if (hvar <= h_eps) {
        out.degenerate[m] = 1;
        continue;
      }
      double best = 0.0;
      for (int d = 0; d < d_count; d++) {
        if (s_var[d] <= 0.0) continue;
        double num = dn * hs[d][m] - h_sum[m] * s_sum[d];
        double rho = std::fabs(num / std::sqrt(hvar * s_var[d]));
        if (rho > best) best = rho;
      }
      out.scores[m] = best;
    }
  } else {
    std::vector<uint8_t> a(n), b(n);
    std::vector<double> srows(n * d_count);
    for (size_t r = 0; r < n; r++) {
      size_t t = row_index(r);
      a[r] = prep.pt_i[t];
      b[r] = prep.pt_j[t];
      std::memcpy(srows.data() + r * d_count,
                  prep.summary.data() + t * d_count,
                  sizeof(double) * d_count);
    }
    std::vector<uint8_t> u(n);
    std::vector<double> hs(d_count);
    for (int ki = 0; ki < 256; ki++) {
      for (size_t r = 0; r < n; r++) u[r] = kSbox[a[r] ^ ki];
      for (int kj = 0; kj < 256; kj++) {
        double sh = 0.0, sh2 = 0.0;
        std::fill(hs.begin(), hs.end(), 0.0);
        for (size_t r = 0; r < n; r++) {
          double h = hyp_value(u[r], kSbox[b[r] ^ kj], cfg);
          sh += h;
          sh2 += h * h;
          const double* srow = srows.data() + r * d_count;
          for (int d = 0; d < d_count; d++) hs[d] += h * srow[d];
        }
        size_t m = (static_cast<size_t>(ki) << 8) | kj;
        double hvar = dn * sh2 - sh * sh;
        if (hvar <= 0.0) {
          out.degenerate[m] = 1;
          continue;
        }
        double best = 0.0;
        for (int d = 0; d < d_count; d++) {
          if (s_var[d] <= 0.0) continue;
          double rho =
              std::fabs((dn * hs[d] - sh * s_sum[d]) /
                        std::sqrt(hvar * s_var[d]));
          if (rho > best) best = rho;
        }
        out.scores[m] = best;
      }
    }
  }
  out.finalize();
  return out;
}

HypothesisScore second_order_attack(const TraceSet& set, int byte_i,
                                    int byte_j, SecondOrderMode mode,
                                    const SecondOrderConfig& cfg) {
  SecondOrderConfig local = cfg;
  local.mode = mode;
  SecondOrderPrep prep = second_order_prepare(
      set.attack, set.manifest, set.timemap, byte_i, byte_j, local);
  return second_order_score(prep, nullptr, local);
}

double select_alpha(const TraceSet& set, int byte_i, int byte_j,
                    const FusionConfig& cfg) {
  if (cfg.grid_step <= 0.0 || cfg.grid_step > 1.0)
    throw ConfigError("grid_step must lie in (0,1]");
  if (!set.manifest.key_present)
    throw MissingKey("profiling split carries no key material");
  if (set.manifest.masked && !set.manifest.masks_present)
    throw MissingKey("profiling split carries no mask material");

  SecondOrderConfig prep_cfg;
  prep_cfg.mode = SecondOrderMode::Power;
  prep_cfg.slide = 0;
  SecondOrderPrep ap = second_order_prepare(set.profiling, set.manifest,
                                            set.timemap, byte_i, byte_j,
                                            prep_cfg);
  prep_cfg.mode = SecondOrderMode::EM;
  SecondOrderPrep ae = second_order_prepare(set.profiling, set.manifest,
                                            set.timemap, byte_i, byte_j,
                                            prep_cfg);

  const size_t n = ap.n;
  if (n < 3) throw InsufficientTraces("alpha selection needs >= 3 traces");
  const double dn = static_cast<double>(n);

  // Search on the same unit-variance scale the combined attack fuses at.
  double wp = inverse_pooled_std(ap.summary);
  double we = inverse_pooled_std(ae.summary);
  for (double& x : ap.summary) x *= wp;
  for (double& x : ae.summary) x *= we;

  double sh = 0.0, sh2 = 0.0, sp = 0.0, sp2 = 0.0, se = 0.0, se2 = 0.0;
  double spe = 0.0, shp = 0.0, she = 0.0;
  for (size_t t = 0; t < n; t++) {
    const TraceMeta& meta = set.profiling.meta_power[t];
    if (!meta.has_key) throw MissingKey("profiling trace lacks key bytes");
    double h = hamming_weight(
        kSbox[meta.plaintext[byte_i] ^ meta.key[byte_i]] ^
        kSbox[meta.plaintext[byte_j] ^ meta.key[byte_j]]);
    double p = ap.summary[t];
    double e = ae.summary[t];
    sh += h;
    sh2 += h * h;
    sp += p;
    sp2 += p * p;
    se += e;
    se2 += e * e;
    spe += p * e;
    shp += h * p;
    she += h * e;
  }
  // centered second moments (times n)
  double vh = dn * sh2 - sh * sh;
  double vp = dn * sp2 - sp * sp;
  double ve = dn * se2 - se * se;
  double cpe = dn * spe - sp * se;
  double chp = dn * shp - sh * sp;
  double che = dn * she - sh * se;

  double best_alpha = 0.0, best_rho = -1.0;
  int steps = static_cast<int>(std::ceil(1.0 / cfg.grid_step - 1e-9));
  for (int g = 0; g <= steps; g++) {
    double alpha = std::min(1.0, g * cfg.grid_step);
    double cov = alpha * chp + (1.0 - alpha) * che;
    double var = alpha * alpha * vp + (1.0 - alpha) * (1.0 - alpha) * ve +
                 2.0 * alpha * (1.0 - alpha) * cpe;
    double rho = 0.0;
    if (var > 0.0 && vh > 0.0) rho = std::fabs(cov) / std::sqrt(var * vh);
    if (rho > best_rho) {
      best_rho = rho;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

}  // namespace spero
