// SPDX-License-Identifier: Apache-2.0
#include "spero/tvla.hpp"

#include <cmath>

#include "spero/aes.hpp"

namespace spero {

std::vector<double> welch_t(const std::vector<stats::RunningStats>& a,
                            const std::vector<stats::RunningStats>& b) {
  if (a.size() != b.size())
    throw LengthMismatch("accumulator lengths differ");
  std::vector<double> t(a.size());
  for (size_t s = 0; s < a.size(); s++) t[s] = stats::welch_t(a[s], b[s]);
  return t;
}

std::vector<double> welch_t(const TraceMatrix& group_a,
                            const TraceMatrix& group_b) {
  if (group_a.width != group_b.width)
    throw LengthMismatch("groups differ in trace length");
  if (group_a.n < 2 || group_b.n < 2)
    throw InsufficientTraces("welch_t needs >= 2 traces per group");
  std::vector<stats::RunningStats> a(group_a.width), b(group_b.width);
  for (size_t r = 0; r < group_a.n; r++) {
    const double* row = group_a.row(r);
    for (size_t s = 0; s < group_a.width; s++) a[s].add(row[s]);
  }
  for (size_t r = 0; r < group_b.n; r++) {
    const double* row = group_b.row(r);
    for (size_t s = 0; s < group_b.width; s++) b[s].add(row[s]);
  }
  return welch_t(a, b);
}

TvlaReport make_tvla_report(std::vector<double> t, double threshold,
                            uint64_t n_fixed, uint64_t n_random) {
  TvlaReport rep;
  rep.t = std::move(t);
  rep.threshold = threshold;
  rep.n_fixed = n_fixed;
  rep.n_random = n_random;
  for (double v : rep.t) rep.max_abs_t = std::max(rep.max_abs_t, std::fabs(v));
  rep.pass = rep.max_abs_t <= threshold;
  return rep;
}

TvlaPair tvla_run(const GenConfig& cfg, uint64_t n_fixed, uint64_t n_random,
                  double threshold) {
  cfg.validate();
  if (n_fixed < 100 || n_random < 100)
    throw ConfigError("leakage assessment needs >= 100 traces per group");

  const uint32_t spt = cfg.samples_per_trace;
  TimeMap map = default_timemap(spt);
  std::vector<stats::RunningStats> pf(spt), pr(spt), ef(spt), er(spt);

  Bytes16 chain = cfg.fixed_pt;
  ExecRecord rec;
  rec.entries.reserve(768);
  uint64_t got_f = 0, got_r = 0;
  for (uint64_t e = 0; got_f < n_fixed || got_r < n_random; e++) {
    // Interleaved FRFR order; once one group is complete the remaining
    // acquisitions all fall to the other.
    bool is_fixed = (e % 2 == 0) ? got_f < n_fixed : got_r >= n_random;
    std::mt19937_64 meta_rng(derive_seed(cfg.master_seed, 1, e));
    PlainBytes pt = is_fixed ? cfg.fixed_pt : chain;

    rec.clear();
    CipherBytes ct;
    if (cfg.masked) {
      MaskVector masks = random_bytes16(meta_rng);
      ct = masked_aes128_encrypt(cfg.key, pt, masks, &rec);
    } else {
      ct = aes128_encrypt(cfg.key, pt, &rec);
    }
    if (!is_fixed) chain = ct;

    auto [power, em] =
        synthesize_dual(rec, map, cfg.power, cfg.em,
                        derive_seed(cfg.master_seed, 2, e));
    auto& pacc = is_fixed ? pf : pr;
    auto& eacc = is_fixed ? ef : er;
    for (uint32_t s = 0; s < spt; s++) {
      pacc[s].add(power.samples[s]);
      eacc[s].add(em.samples[s]);
    }
    (is_fixed ? got_f : got_r)++;
  }

  TvlaPair out;
  out.power = make_tvla_report(welch_t(pf, pr), threshold, n_fixed, n_random);
  out.em = make_tvla_report(welch_t(ef, er), threshold, n_fixed, n_random);
  return out;
}

}  // namespace spero
