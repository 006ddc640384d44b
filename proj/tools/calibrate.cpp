// SPDX-License-Identifier: Apache-2.0
//
// Pilot runner. Measures MTDs on the benchmark fixtures and prints a
// calibration JSON blob; the committed copy (calibration.json) pins the
// trace budgets the acceptance suite uses. Rerun after touching the
// leakage model, the channel presets, or the fixture configs.

#include <cstdio>
#include <iostream>

#include "json.hpp"

#include "bench_fixtures.hpp"
#include "spero/eval.hpp"
#include "spero/tvla.hpp"

using namespace spero;
using nlohmann::json;

namespace {

uint64_t mtd_or(const MtdResult& r, uint64_t fallback) {
  return r.mtd ? *r.mtd : fallback;
}

}  // namespace

int main() {
  const uint64_t seed = bench::kBenchSeed;
  json out;
  out["seed"] = seed;
  out["repeats"] = 20;

  // First-order MTD per channel, worst case over the 16 subkeys.
  {
    TraceSet set = generate_dataset(bench::fx_first_order_unmasked(seed));
    auto grid = geometric_grid(5, set.attack.n);
    json sect;
    sect["grid_lo"] = grid.front();
    sect["grid_hi"] = grid.back();
    for (const char* mode : {"power", "em"}) {
      uint64_t worst = 0;
      bool reached = true;
      json per;
      for (int s = 0; s < 16; s++) {
        AttackSpec spec;
        spec.kind = AttackKind::Cpa;
        spec.mode = mode == std::string("power") ? ChannelMode::Power
                                                 : ChannelMode::EM;
        spec.subkey = s;
        MtdResult r = mtd(spec, set, grid, 20, seed);
        per.push_back(r.mtd ? json(*r.mtd) : json(nullptr));
        if (!r.mtd) reached = false;
        worst = std::max(worst, mtd_or(r, set.attack.n));
        std::cerr << "first-order " << mode << " subkey " << s << ": "
                  << (r.mtd ? std::to_string(*r.mtd) : "not reached") << "\n";
      }
      sect[std::string("mtd_") + mode] = per;
      sect[std::string("mtd_") + mode + "_max"] = worst;
      sect[std::string(mode) + "_all_reached"] = reached;
    }
    out["first_order"] = sect;
  }

  // Second-order MTD, power channel, worst case over the 8 disjoint pairs.
  {
    TraceSet set = generate_dataset(bench::fx_second_order_masked(seed));
    auto grid = geometric_grid(50, set.attack.n, 8);
    json sect;
    sect["grid_lo"] = grid.front();
    sect["grid_hi"] = grid.back();
    uint64_t worst = 0;
    bool reached = true;
    json per;
    for (int i = 0; i < 16; i += 2) {
      AttackSpec spec;
      spec.kind = AttackKind::SecondOrder;
      spec.mode = ChannelMode::Power;
      spec.pair_i = i;
      spec.pair_j = i + 1;
      spec.second.slide = 0;
      MtdResult r = mtd(spec, set, grid, 20, seed);
      per.push_back(r.mtd ? json(*r.mtd) : json(nullptr));
      if (!r.mtd) reached = false;
      worst = std::max(worst, mtd_or(r, set.attack.n));
      std::cerr << "second-order power pair (" << i << "," << i + 1 << "): "
                << (r.mtd ? std::to_string(*r.mtd) : "not reached") << "\n";
    }
    sect["mtd_power"] = per;
    sect["mtd_power_max"] = worst;
    sect["all_reached"] = reached;
    // Budget for rank-1 recovery of every pair: worst MTD plus 25% headroom,
    // clamped to the fixture's attack split.
    uint64_t budget = std::min<uint64_t>(set.attack.n, worst + worst / 4);
    sect["budget"] = budget;
    out["second_order"] = sect;
  }

  // Leakage-assessment pilot at reduced trace counts: verifies the seed
  // gives the expected verdict pair before the long acceptance run.
  {
    TvlaPair masked = tvla_run(bench::fx_tvla(seed, true), 20000, 20000);
    TvlaPair unmasked = tvla_run(bench::fx_tvla(seed, false), 5000, 5000);
    json sect;
    sect["masked_max_t_power_20k"] = masked.power.max_abs_t;
    sect["masked_max_t_em_20k"] = masked.em.max_abs_t;
    sect["unmasked_max_t_power_5k"] = unmasked.power.max_abs_t;
    sect["unmasked_max_t_em_5k"] = unmasked.em.max_abs_t;
    out["tvla_pilot"] = sect;
    std::cerr << "tvla pilot: masked max|t| " << masked.power.max_abs_t
              << " / " << masked.em.max_abs_t << ", unmasked "
              << unmasked.power.max_abs_t << " / " << unmasked.em.max_abs_t
              << "\n";
  }

  std::cout << out.dump(2) << "\n";
  return 0;
}
