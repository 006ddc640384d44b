// SPDX-License-Identifier: Apache-2.0
#include "spero/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "spero/aes.hpp"

namespace spero {

const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::DpaDom: return "dpa";
    case AttackKind::Cpa: return "cpa";
    default: return "second-order";
  }
}

const char* channel_mode_name(ChannelMode m) {
  switch (m) {
    case ChannelMode::Power: return "power";
    case ChannelMode::EM: return "em";
    default: return "combined";
  }
}

void AttackSpec::validate() const {
  if (subkey < 0 || subkey > 15) throw ConfigError("subkey out of range");
  if (target_bit < 0 || target_bit > 7)
    throw ConfigError("target_bit out of range");
  if (kind == AttackKind::SecondOrder) {
    if (pair_i < 0 || pair_i > 15 || pair_j < 0 || pair_j > 15 ||
        pair_i == pair_j)
      throw ConfigError("pair bytes must be distinct indices in 0..15");
  }
  if (alpha && (*alpha < 0.0 || *alpha > 1.0))
    throw ConfigError("alpha must lie in [0,1]");
}

std::string AttackSpec::describe() const {
  std::ostringstream os;
  os << attack_kind_name(kind) << " mode=" << channel_mode_name(mode);
  if (kind == AttackKind::SecondOrder)
    os << " pair=" << pair_i << "," << pair_j << " slide=" << second.slide;
  else
    os << " subkey=" << subkey;
  if (kind == AttackKind::DpaDom) os << " bit=" << target_bit;
  if (alpha) os << " alpha=" << *alpha;
  return os.str();
}

std::vector<uint32_t> window_columns(const TimeMap& map, int byte_index) {
  std::vector<uint32_t> cols;
  for (const auto& w : map.windows) {
    if (w.round == 1 && w.byte_index == byte_index)
      for (uint32_t s = w.start; s < w.end; s++) cols.push_back(s);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

TraceMatrix extract_matrix(const SplitData& split, const ChannelModel& model,
                           Trace::Channel channel,
                           const std::vector<uint32_t>& columns) {
  const std::vector<int16_t>& src =
      channel == Trace::Channel::Power ? split.power : split.em;
  const size_t spt = split.n ? src.size() / split.n : 0;
  TraceMatrix m;
  if (columns.empty()) {
    m.resize(split.n, spt);
    for (size_t t = 0; t < split.n; t++) {
      const int16_t* row = src.data() + t * spt;
      double* out = m.row(t);
      for (size_t s = 0; s < spt; s++)
        out[s] = dequantize(model, row[s]) - model.offset;
    }
  } else {
    for (uint32_t c : columns)
      if (c >= spt) throw ConfigError("column index exceeds trace length");
    m.resize(split.n, columns.size());
    for (size_t t = 0; t < split.n; t++) {
      const int16_t* row = src.data() + t * spt;
      double* out = m.row(t);
      for (size_t s = 0; s < columns.size(); s++)
        out[s] = dequantize(model, row[columns[s]]) - model.offset;
    }
  }
  return m;
}

std::vector<Bytes16> extract_plaintexts(const SplitData& split) {
  std::vector<Bytes16> out(split.n);
  for (size_t t = 0; t < split.n; t++) out[t] = split.meta_power[t].plaintext;
  return out;
}

namespace {

SecondOrderMode to_second_mode(ChannelMode m) {
  switch (m) {
    case ChannelMode::Power: return SecondOrderMode::Power;
    case ChannelMode::EM: return SecondOrderMode::EM;
    default: return SecondOrderMode::Combined;
  }
}

// 1/stddev over every matrix entry; 0 for a constant channel so it drops out
// of a fused combination.
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

// Profiled fusion coefficient for first-order combined attacks: grid-search
// alpha maximizing the best per-column |Pearson| between alpha*P + (1-a)*E
// and the true-key HW hypothesis on the profiling split.  Both channels are
// rescaled to unit pooled variance first, the same footing the combined
// attack fuses on, so alpha weighs information rather than volt scale.
double first_order_alpha(const TraceSet& set, int subkey,
                         const std::vector<uint32_t>& columns,
                         double grid_step) {
  if (!set.manifest.key_present)
    throw MissingKey("profiling split carries no key material");
  TraceMatrix p = extract_matrix(set.profiling, set.manifest.power_model,
                                 Trace::Channel::Power, columns);
  TraceMatrix e = extract_matrix(set.profiling, set.manifest.em_model,
                                 Trace::Channel::EM, columns);
  const size_t n = p.n, w = p.width;
  if (n < 3) throw InsufficientTraces("alpha selection needs >= 3 traces");
  const double dn = static_cast<double>(n);

  double scale_p = inverse_pooled_std(p.data);
  double scale_e = inverse_pooled_std(e.data);
  for (double& x : p.data) x *= scale_p;
  for (double& x : e.data) x *= scale_e;

  std::vector<double> h(n);
  for (size_t t = 0; t < n; t++) {
    const TraceMeta& meta = set.profiling.meta_power[t];
    if (!meta.has_key) throw MissingKey("profiling trace lacks key bytes");
    h[t] = hamming_weight(kSbox[meta.plaintext[subkey] ^ meta.key[subkey]]);
  }
  double sh = 0.0, sh2 = 0.0;
  for (double v : h) {
    sh += v;
    sh2 += v * v;
  }
  double vh = dn * sh2 - sh * sh;

  std::vector<double> sp(w, 0.0), se(w, 0.0), spp(w, 0.0), see(w, 0.0),
      spe(w, 0.0), shp(w, 0.0), she(w, 0.0);
  for (size_t t = 0; t < n; t++) {
    const double* pr = p.row(t);
    const double* er = e.row(t);
    for (size_t s = 0; s < w; s++) {
      sp[s] += pr[s];
      se[s] += er[s];
      spp[s] += pr[s] * pr[s];
      see[s] += er[s] * er[s];
      spe[s] += pr[s] * er[s];
      shp[s] += h[t] * pr[s];
      she[s] += h[t] * er[s];
    }
  }

  double best_alpha = 0.0, best_rho = -1.0;
  int steps = static_cast<int>(std::ceil(1.0 / grid_step - 1e-9));
  for (int g = 0; g <= steps; g++) {
    double a = std::min(1.0, g * grid_step);
    double rho = 0.0;
    for (size_t s = 0; s < w; s++) {
      double vp = dn * spp[s] - sp[s] * sp[s];
      double ve = dn * see[s] - se[s] * se[s];
      double cpe = dn * spe[s] - sp[s] * se[s];
      double chp = dn * shp[s] - sh * sp[s];
      double che = dn * she[s] - sh * se[s];
      double cov = a * chp + (1.0 - a) * che;
      double var = a * a * vp + (1.0 - a) * (1.0 - a) * ve +
                   2.0 * a * (1.0 - a) * cpe;
      if (var > 0.0 && vh > 0.0)
        rho = std::max(rho, std::fabs(cov) / std::sqrt(var * vh));
    }
    if (rho > best_rho) {
      best_rho = rho;
      best_alpha = a;
    }
  }
  return best_alpha;
}

std::vector<uint32_t> sample_without_replacement(size_t population, uint64_t n,
                                                 std::mt19937_64& rng) {
  std::vector<uint32_t> idx(population);
  std::iota(idx.begin(), idx.end(), 0u);
  for (uint64_t i = 0; i < n; i++) {
    uint64_t j = i + rng() % (population - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace

AttackRunner::AttackRunner(const TraceSet& set, const AttackSpec& spec)
    : spec_(spec) {
  spec.validate();
  n_ = set.attack.n;

  if (set.profiling.meta_power.empty() ||
      !set.profiling.meta_power[0].has_key)
    throw MissingKey(
        "profiling split carries no key; ground truth unavailable");
  const Bytes16& key = set.profiling.meta_power[0].key;

  if (spec.kind == AttackKind::SecondOrder) {
    truth_ = (static_cast<uint32_t>(key[spec.pair_i]) << 8) | key[spec.pair_j];
    SecondOrderConfig c = spec.second;
    c.mode = to_second_mode(spec.mode);
    if (spec.mode == ChannelMode::Combined) {
      alpha_ = spec.alpha ? *spec.alpha
                          : select_alpha(set, spec.pair_i, spec.pair_j,
                                         c.fusion);
      c.fusion.alpha = alpha_;
    }
    spec_.second = c;
    prep_ = std::make_shared<SecondOrderPrep>(
        second_order_prepare(set.attack, set.manifest, set.timemap,
                             spec.pair_i, spec.pair_j, c));
    return;
  }

  truth_ = key[spec.subkey];
  std::vector<uint32_t> columns;
  if (spec.restrict_windows) {
    columns = window_columns(set.timemap, spec.subkey);
    if (columns.empty())
      throw MissingWindow("time map has no round-1 windows for byte " +
                          std::to_string(spec.subkey));
  }
  plaintexts_ = extract_plaintexts(set.attack);
  switch (spec.mode) {
    case ChannelMode::Power:
      first_order_ = extract_matrix(set.attack, set.manifest.power_model,
                                    Trace::Channel::Power, columns);
      break;
    case ChannelMode::EM:
      first_order_ = extract_matrix(set.attack, set.manifest.em_model,
                                    Trace::Channel::EM, columns);
      break;
    case ChannelMode::Combined: {
      alpha_ = spec.alpha ? *spec.alpha
                          : first_order_alpha(set, spec.subkey, columns,
                                              spec.second.fusion.grid_step);
      TraceMatrix p = extract_matrix(set.attack, set.manifest.power_model,
                                     Trace::Channel::Power, columns);
      TraceMatrix e = extract_matrix(set.attack, set.manifest.em_model,
                                     Trace::Channel::EM, columns);
      double scale_p = inverse_pooled_std(p.data);
      double scale_e = inverse_pooled_std(e.data);
      first_order_ = std::move(p);
      for (size_t i = 0; i < first_order_.data.size(); i++)
        first_order_.data[i] = alpha_ * first_order_.data[i] * scale_p +
                               (1.0 - alpha_) * e.data[i] * scale_e;
      break;
    }
  }
}

HypothesisScore AttackRunner::run(const std::vector<uint32_t>* subset) const {
  if (spec_.kind == AttackKind::SecondOrder)
    return second_order_score(*prep_, subset, spec_.second);

  const TraceMatrix* m = &first_order_;
  const std::vector<Bytes16>* pts = &plaintexts_;
  TraceMatrix sub;
  std::vector<Bytes16> sub_pts;
  if (subset) {
    sub.resize(subset->size(), first_order_.width);
    sub_pts.resize(subset->size());
    for (size_t r = 0; r < subset->size(); r++) {
      uint32_t t = (*subset)[r];
      std::copy_n(first_order_.row(t), first_order_.width, sub.row(r));
      sub_pts[r] = plaintexts_[t];
    }
    m = &sub;
    pts = &sub_pts;
  }
  if (spec_.kind == AttackKind::DpaDom)
    return dpa_dom(*m, *pts, spec_.subkey, spec_.target_bit);
  return cpa(*m, *pts, spec_.subkey);
}

bool AttackRunner::succeeds(const std::vector<uint32_t>* subset) const {
  return run(subset).best == truth_;
}

namespace {

double rate_batch(const AttackRunner& runner, uint64_t n, int repeats,
                  uint64_t seed, int repeat_offset) {
  int wins = 0;
  for (int r = 0; r < repeats; r++) {
    std::mt19937_64 rng(
        derive_seed(seed, static_cast<uint64_t>(repeat_offset + r), n));
    auto subset = sample_without_replacement(runner.available(), n, rng);
    if (runner.succeeds(&subset)) wins++;
  }
  return static_cast<double>(wins) / repeats;
}

}  // namespace

double success_rate(const AttackSpec& spec, const TraceSet& set, uint64_t n,
                    int repeats, uint64_t seed) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  AttackRunner runner(set, spec);
  if (n > runner.available())
    throw InsufficientTraces("subsample size exceeds attack split");
  if (n == 0) throw ConfigError("subsample size must be >= 1");
  return rate_batch(runner, n, repeats, seed, 0);
}

MtdResult mtd(const AttackSpec& spec, const TraceSet& set,
              const std::vector<uint64_t>& grid, int repeats, uint64_t seed) {
  if (grid.empty()) throw ConfigError("grid must not be empty");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ConfigError("grid must be ascending");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");

  AttackRunner runner(set, spec);
  MtdResult res;
  res.spec = spec;
  res.grid = grid;
  res.repeats = repeats;
  res.rates.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (size_t gi = 0; gi < grid.size(); gi++) {
    uint64_t n = grid[gi];
    if (n == 0 || n > runner.available())
      throw InsufficientTraces("grid point outside attack split size");
    double rate = rate_batch(runner, n, repeats, seed, 0);
    res.rates[gi] = rate;
    if (rate == 1.0 &&
        rate_batch(runner, n, repeats, seed, repeats) == 1.0) {
      res.mtd = n;
      break;
    }
  }
  return res;
}

std::vector<uint64_t> geometric_grid(uint64_t lo, uint64_t hi,
                                     int points_per_decade) {
  if (lo == 0 || lo > hi) throw ConfigError("grid bounds must satisfy 0 < lo <= hi");
  if (points_per_decade < 1) throw ConfigError("points_per_decade must be >= 1");
  std::vector<uint64_t> grid;
  for (int k = 0;; k++) {
    double v = lo * std::pow(10.0, static_cast<double>(k) / points_per_decade);
    uint64_t n = static_cast<uint64_t>(std::llround(v));
    if (n > hi) break;
    if (grid.empty() || n != grid.back()) grid.push_back(n);
  }
  if (grid.empty() || grid.back() != hi) grid.push_back(hi);
  return grid;
}

}  // namespace spero
