// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance gate. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any fail. Trace budgets for
// the second-order criteria come from calibration.json (see
// tools/calibrate.cpp); every tolerance is pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bench_fixtures.hpp"
#include "spero/antenna.hpp"
#include "spero/attack.hpp"
#include "spero/dataset.hpp"
#include "spero/eval.hpp"
#include "spero/rt_emulator.hpp"
#include "spero/tvla.hpp"

namespace fs = std::filesystem;
using namespace spero;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

template <typename F>
void criterion(int id, const std::string& title, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("unexpected error: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  char stamp[32];
  std::snprintf(stamp, sizeof(stamp), "(%.1f s)", secs);
  std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion "
            << (id < 10 ? " " : "") << id << ": " << title << " — "
            << out.detail << " " << stamp << std::endl;
  if (!out.pass) g_failures++;
}

struct Calibration {
  uint64_t seed = bench::kBenchSeed;
  uint64_t second_order_budget = 0;
  uint64_t second_order_grid_lo = 50;
  uint64_t second_order_grid_hi = 8000;
  bool loaded = false;
  std::string error;
};

Calibration load_calibration() {
  Calibration cal;
  std::ifstream in(SPERO_CALIBRATION_FILE);
  if (!in) {
    cal.error = "calibration file missing: " SPERO_CALIBRATION_FILE;
    return cal;
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("second_order") ||
      !j["second_order"].contains("budget")) {
    cal.error = "calibration file lacks second_order.budget";
    return cal;
  }
  cal.seed = j.value("seed", bench::kBenchSeed);
  cal.second_order_budget = j["second_order"]["budget"].get<uint64_t>();
  cal.second_order_grid_lo = j["second_order"].value("grid_lo", 50);
  cal.second_order_grid_hi = j["second_order"].value("grid_hi", 8000);
  cal.loaded = true;
  return cal;
}

std::string fmt_mtd(const std::optional<uint64_t>& v) {
  return v ? std::to_string(*v) : std::string("not reached");
}

uint64_t truth_pair(const TraceSet& set, int i, int j) {
  const Bytes16& k = set.profiling.meta_power[0].key;
  return (static_cast<uint32_t>(k[i]) << 8) | k[j];
}

AttackSpec cpa_spec(ChannelMode mode, int subkey) {
  AttackSpec s;
  s.kind = AttackKind::Cpa;
  s.mode = mode;
  s.subkey = subkey;
  return s;
}

AttackSpec pair_spec(ChannelMode mode, int i, int j) {
  AttackSpec s;
  s.kind = AttackKind::SecondOrder;
  s.mode = mode;
  s.pair_i = i;
  s.pair_j = j;
  s.second.slide = 0;
  return s;
}

}  // namespace

int main() {
  Calibration cal = load_calibration();
  const uint64_t seed = cal.seed;

  // Results shared across criteria 3 -> 4/5.
  uint64_t unmasked_mtd_power_max = 0, unmasked_mtd_em_max = 0;
  bool unmasked_mtd_complete = false;

  criterion(1, "cipher correctness", [&]() -> Outcome {
    auto t0 = std::chrono::steady_clock::now();
    auto key = bytes16_from_hex("000102030405060708090a0b0c0d0e0f");
    auto pt = bytes16_from_hex("00112233445566778899aabbccddeeff");
    bool kats =
        to_hex(aes128_encrypt(key, pt)) == "69c4e0d86a7b0430d8cdb78070b4c55a";
    Bytes16 zero{};
    kats = kats && to_hex(aes128_encrypt(zero, zero)) ==
                       "66e94bd4ef8a2c3b884cfa59ca342b2e";

    std::mt19937_64 rng(seed);
    size_t matches = 0;
    const size_t trials = 10000;
    for (size_t i = 0; i < trials; i++) {
      Bytes16 k = random_bytes16(rng), p = random_bytes16(rng),
              m = random_bytes16(rng);
      if (masked_aes128_encrypt(k, p, m) == aes128_encrypt(k, p)) matches++;
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    std::ostringstream d;
    d << "KATs " << (kats ? "ok" : "WRONG") << ", masked==unmasked "
      << matches << "/" << trials << ", " << (secs < 10.0 ? "within" : "OVER")
      << " 10 s budget";
    return {kats && matches == trials && secs < 10.0, d.str()};
  });

  criterion(2, "mask algebra", [&]() -> Outcome {
    std::mt19937_64 rng(seed + 1);
    size_t ok_runs = 0;
    const size_t runs = 1000;
    for (size_t i = 0; i < runs; i++) {
      Bytes16 k = random_bytes16(rng), p = random_bytes16(rng),
              m = random_bytes16(rng);
      ExecRecord um, mm;
      aes128_encrypt(k, p, &um);
      masked_aes128_encrypt(k, p, m, &mm);
      bool good = true;
      for (int b = 0; b < 16 && good; b++) {
        good = (mm.find(OpTag::AddRoundKeyOut, 1, b)->value ^ m[4]) ==
               um.find(OpTag::AddRoundKeyOut, 1, b)->value;
        for (int r = 1; r <= 10 && good; r++)
          good = (mm.find(OpTag::SboxOut, r, b)->value ^ m[5]) ==
                 um.find(OpTag::SboxOut, r, b)->value;
      }
      if (good) ok_runs++;
    }

    size_t mask_sets_ok = 0;
    const int mask_sets = 100;
    for (int t = 0; t < mask_sets; t++) {
      uint8_t m_in = static_cast<uint8_t>(rng());
      uint8_t m_out = static_cast<uint8_t>(rng());
      auto table = masked_sbox_table(m_in, m_out);
      bool good = true;
      for (int x = 0; x < 256 && good; x++)
        for (int y = 0; y < 256; y++)
          if ((uint8_t)(table[x ^ m_in] ^ table[y ^ m_in]) !=
              (uint8_t)(kSbox[x] ^ kSbox[y])) {
            good = false;
            break;
          }
      if (good) mask_sets_ok++;
    }
    std::ostringstream d;
    d << "intermediate identities " << ok_runs << "/" << runs
      << " runs, pair-xor cancellation " << mask_sets_ok << "/" << mask_sets
      << " mask sets (256x256 each)";
    return {ok_runs == runs && mask_sets_ok == mask_sets, d.str()};
  });

  criterion(3, "first-order recovery on the unmasked preset", [&]() -> Outcome {
    auto t0 = std::chrono::steady_clock::now();
    TraceSet set = generate_dataset(bench::fx_first_order_unmasked(seed));
    const Bytes16& key = set.profiling.meta_power[0].key;

    int rank1 = 0;
    for (auto mode : {ChannelMode::Power, ChannelMode::EM}) {
      for (int s = 0; s < 16; s++) {
        AttackSpec c = cpa_spec(mode, s);
        AttackRunner rc(set, c);
        if (rc.run(nullptr).best == key[s]) rank1++;
        AttackSpec dp;
        dp.kind = AttackKind::DpaDom;
        dp.mode = mode;
        dp.subkey = s;
        dp.target_bit = 0;
        AttackRunner rd(set, dp);
        if (rd.run(nullptr).best == key[s]) rank1++;
      }
    }

    auto grid = geometric_grid(5, set.attack.n);
    bool all_reached = true, rate_ok = true;
    uint64_t worst_p = 0, worst_e = 0;
    for (auto mode : {ChannelMode::Power, ChannelMode::EM}) {
      for (int s = 0; s < 16; s++) {
        AttackSpec spec = cpa_spec(mode, s);
        MtdResult r = mtd(spec, set, grid, 20, seed);
        if (!r.mtd) {
          all_reached = false;
          continue;
        }
        if (success_rate(spec, set, *r.mtd, 20, seed) != 1.0) rate_ok = false;
        (mode == ChannelMode::Power ? worst_p : worst_e) =
            std::max(mode == ChannelMode::Power ? worst_p : worst_e, *r.mtd);
      }
    }
    unmasked_mtd_power_max = worst_p;
    unmasked_mtd_em_max = worst_e;
    unmasked_mtd_complete = all_reached;

    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    std::ostringstream d;
    d << "rank-1 " << rank1 << "/64 (16 subkeys x {cpa,dpa} x {power,em}), "
      << "per-channel MTDs " << (all_reached ? "all" : "NOT all")
      << " reached <= 2000 (worst power " << worst_p << ", em " << worst_e
      << "), rate@MTD " << (rate_ok ? "1.0" : "<1.0") << ", "
      << (secs < 120.0 ? "within" : "OVER") << " 2 min budget";
    return {rank1 == 64 && all_reached && rate_ok && secs < 120.0, d.str()};
  });

  criterion(4, "masking defeats first order", [&]() -> Outcome {
    auto t0 = std::chrono::steady_clock::now();
    if (!unmasked_mtd_complete)
      return {false, "no unmasked MTD baseline from criterion 3"};
    TraceSet set = generate_dataset(bench::fx_first_order_masked(seed));

    bool rates_ok = true;
    double worst_rate = 0.0;
    for (auto mode : {ChannelMode::Power, ChannelMode::EM}) {
      uint64_t base =
          mode == ChannelMode::Power ? unmasked_mtd_power_max : unmasked_mtd_em_max;
      uint64_t n_eval = std::min<uint64_t>(20 * base, set.attack.n);
      if (n_eval < 20 * base)
        return {false, "attack split too small for 20x the unmasked MTD"};
      for (int s = 0; s < 16; s++) {
        double r = success_rate(cpa_spec(mode, s), set, n_eval, 20, seed);
        worst_rate = std::max(worst_rate, r);
        if (r > 0.1) rates_ok = false;
      }
    }

    TvlaPair masked = tvla_run(bench::fx_tvla(seed, true), 100000, 100000);
    TvlaPair unmasked = tvla_run(bench::fx_tvla(seed, false), 5000, 5000);
    bool tvla_ok = masked.power.max_abs_t <= 4.5 && masked.em.max_abs_t <= 4.5 &&
                   unmasked.power.max_abs_t > 4.5 && unmasked.em.max_abs_t > 4.5;

    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    std::ostringstream d;
    d << "cpa rate at 20x unmasked MTD <= 0.1 "
      << (rates_ok ? "ok" : "VIOLATED") << " (worst " << worst_rate
      << "), masked tvla max|t| " << masked.power.max_abs_t << "/"
      << masked.em.max_abs_t << " vs unmasked " << unmasked.power.max_abs_t
      << "/" << unmasked.em.max_abs_t << ", "
      << (secs < 600.0 ? "within" : "OVER") << " 10 min budget";
    return {rates_ok && tvla_ok && secs < 600.0, d.str()};
  });

  criterion(5, "second-order recovery and the masking gap", [&]() -> Outcome {
    if (!cal.loaded) return {false, cal.error};
    if (!unmasked_mtd_complete)
      return {false, "no unmasked MTD baseline from criterion 3"};
    TraceSet set = generate_dataset(bench::fx_second_order_masked(seed));
    if (cal.second_order_budget > set.attack.n)
      return {false, "calibrated budget exceeds the fixture's attack split"};

    std::vector<uint32_t> subset(cal.second_order_budget);
    for (uint32_t i = 0; i < subset.size(); i++) subset[i] = i;

    int rank1 = 0;
    for (int i = 0; i < 16; i += 2) {
      AttackRunner runner(set, pair_spec(ChannelMode::Power, i, i + 1));
      auto score = runner.run(&subset);
      if (score.best == truth_pair(set, i, i + 1)) rank1++;
    }

    auto grid = geometric_grid(cal.second_order_grid_lo,
                               std::min<uint64_t>(cal.second_order_grid_hi,
                                                  set.attack.n),
                               8);
    uint64_t masked_min = UINT64_MAX;
    bool all_reached = true;
    for (int i = 0; i < 16; i += 2) {
      MtdResult r = mtd(pair_spec(ChannelMode::Power, i, i + 1), set, grid, 20,
                        seed);
      if (!r.mtd) {
        all_reached = false;
        continue;
      }
      masked_min = std::min(masked_min, *r.mtd);
    }
    bool gap_ok = all_reached && unmasked_mtd_power_max > 0 &&
                  masked_min > 5 * unmasked_mtd_power_max;

    std::ostringstream d;
    d << "rank-1 pairs " << rank1 << "/8 at budget "
      << cal.second_order_budget << ", min masked MTD "
      << (all_reached ? std::to_string(masked_min) : std::string("not reached"))
      << " vs 5x unmasked " << 5 * unmasked_mtd_power_max;
    return {rank1 == 8 && gap_ok, d.str()};
  });

  criterion(6, "dual-channel fusion never hurts, >=10% on average",
            [&]() -> Outcome {
    double reductions_sum = 0.0;
    size_t reductions_n = 0;
    size_t violations = 0, unreached = 0;
    std::ostringstream bad;  // which cases, with their power/em/combined MTDs

    auto compare = [&](const char* tag, int sidx, int which,
                       const std::optional<uint64_t> m[3]) {
      if (!m[0] || !m[1] || !m[2]) {
        unreached++;
        bad << " [" << tag << " seed+" << sidx << " #" << which << ": "
            << fmt_mtd(m[0]) << "/" << fmt_mtd(m[1]) << "/" << fmt_mtd(m[2])
            << "]";
        return;
      }
      uint64_t single = std::min(*m[0], *m[1]);
      if (*m[2] > single) {
        violations++;
        bad << " [" << tag << " seed+" << sidx << " #" << which << ": "
            << *m[0] << "/" << *m[1] << "/" << *m[2] << "]";
      }
      reductions_sum += 1.0 - static_cast<double>(*m[2]) / single;
      reductions_n++;
    };

    for (int sidx = 1; sidx <= 5; sidx++) {
      uint64_t s = seed + sidx;
      {
        TraceSet set = generate_dataset(bench::fx_dual_first_order(s));
        auto grid = geometric_grid(30, set.attack.n, 16);
        for (int sk = 0; sk < 16; sk++) {
          std::optional<uint64_t> m[3];
          ChannelMode modes[3] = {ChannelMode::Power, ChannelMode::EM,
                                  ChannelMode::Combined};
          for (int i = 0; i < 3; i++)
            m[i] = mtd(cpa_spec(modes[i], sk), set, grid, 20, seed).mtd;
          compare("fo", sidx, sk, m);
        }
      }
      {
        TraceSet set = generate_dataset(bench::fx_dual_second_order(s));
        auto grid = geometric_grid(100, set.attack.n, 8);
        for (int p = 0; p < 16; p += 2) {
          std::optional<uint64_t> m[3];
          ChannelMode modes[3] = {ChannelMode::Power, ChannelMode::EM,
                                  ChannelMode::Combined};
          for (int i = 0; i < 3; i++)
            m[i] = mtd(pair_spec(modes[i], p, p + 1), set, grid, 20, seed).mtd;
          compare("so", sidx, p, m);
        }
      }
    }
    double avg = reductions_n ? reductions_sum / reductions_n : 0.0;
    std::ostringstream d;
    d << "combined <= min(power,em): " << violations << " violations, "
      << unreached << " comparisons unreached, avg reduction "
      << static_cast<int>(avg * 100 + 0.5) << "% over " << reductions_n
      << " subkey/pair cases x 5 seeds" << bad.str();
    return {violations == 0 && unreached == 0 && avg >= 0.10, d.str()};
  });

  criterion(7, "fusion weight sanity", [&]() -> Outcome {
    TraceSet dead_em = generate_dataset(bench::fx_alpha_dead_em(seed + 20));
    double a_dead_em = select_alpha(dead_em, 0, 1);
    TraceSet dead_p = generate_dataset(bench::fx_alpha_dead_power(seed + 21));
    double a_dead_p = select_alpha(dead_p, 0, 1);

    double sum = 0.0;
    for (int i = 0; i < 10; i++) {
      TraceSet sym = generate_dataset(bench::fx_alpha_symmetric(seed + 40 + i));
      sum += select_alpha(sym, 0, 1);
    }
    double mean = sum / 10.0;

    bool ok = a_dead_em >= 0.99 && a_dead_p <= 0.01 &&
              std::fabs(mean - 0.5) <= 0.05;
    std::ostringstream d;
    d << "alpha(dead EM)=" << a_dead_em << ", alpha(dead power)=" << a_dead_p
      << ", symmetric mean over 10 seeds " << mean;
    return {ok, d.str()};
  });

  criterion(8, "jitter never helps the second-order attack", [&]() -> Outcome {
    bool ok = true;
    std::ostringstream d;
    for (int i = 0; i < 3; i++) {
      uint64_t s = seed + 30 + i;
      TraceSet base_set = generate_dataset(bench::fx_jitter(s, 0.0));
      TraceSet jit_set = generate_dataset(bench::fx_jitter(s, 0.01));
      auto grid = geometric_grid(100, base_set.attack.n, 8);
      auto base = mtd(pair_spec(ChannelMode::Power, 0, 1), base_set, grid, 20,
                      seed);
      auto jit =
          mtd(pair_spec(ChannelMode::Power, 0, 1), jit_set, grid, 20, seed);
      if (!base.mtd) ok = false;  // fixture must resolve the baseline
      else if (jit.mtd && *jit.mtd < *base.mtd) ok = false;
      d << (i ? "; " : "") << "seed+" << 30 + i << ": " << fmt_mtd(base.mtd)
        << " -> " << fmt_mtd(jit.mtd);
    }
    return {ok, d.str()};
  });

  criterion(9, "integer emulator fidelity", [&]() -> Outcome {
    std::mt19937_64 rng(seed + 60);
    const size_t n = 40, nf = 5;
    size_t agreements = 0, ties = 0, mismatches = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; trial++) {
      int subkey = static_cast<int>(rng() % 16);
      int bit = static_cast<int>(rng() % 8);
      RtDpaAccumulator acc({0, 1, 2, 3, 4}, subkey, bit);
      RtDpaAccumulator chunked({0, 1, 2, 3, 4}, subkey, bit);
      TraceMatrix m;
      m.resize(n, nf);
      std::vector<Bytes16> pts(n);
      std::vector<std::vector<int16_t>> feats(n, std::vector<int16_t>(nf));
      for (size_t t = 0; t < n; t++) {
        pts[t] = random_bytes16(rng);
        for (size_t f = 0; f < nf; f++) {
          feats[t][f] =
              static_cast<int16_t>(static_cast<int>(rng() % 4001) - 2000);
          m.data[t * nf + f] = feats[t][f];
        }
        acc.stream_trace(feats[t], pts[t]);
      }
      for (size_t t = 0; t < n; t += 2) chunked.stream_trace(feats[t], pts[t]);
      for (size_t t = 1; t < n; t += 2) chunked.stream_trace(feats[t], pts[t]);
      for (int k = 0; k < 256; k++) {
        if (chunked.guess_stat(k).num != acc.guess_stat(k).num ||
            chunked.guess_stat(k).den != acc.guess_stat(k).den)
          return {false, "streaming differs from batch order"};
      }

      auto ranked = acc.rank_without_division();
      auto fp = dpa_dom(m, pts, subkey, bit);
      if (ranked.ranking[0] == fp.best) {
        agreements++;
      } else {
        auto a = acc.guess_stat(ranked.ranking[0]);
        auto b = acc.guess_stat(fp.best);
        if (static_cast<__int128>(a.num) * b.den ==
            static_cast<__int128>(b.num) * a.den)
          ties++;
        else
          mismatches++;
      }
    }
    std::ostringstream d;
    d << "argmax agreement " << agreements << "/" << trials << ", exact ties "
      << ties << ", true mismatches " << mismatches
      << ", streaming==batch on all trials";
    return {mismatches == 0 && agreements >= trials * 99 / 100, d.str()};
  });

  criterion(10, "antenna design math", [&]() -> Outcome {
    std::mt19937_64 rng(seed + 70);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double rel = 1e-12;
    bool identities = true;
    for (int t = 0; t < 200 && identities; t++) {
      AntennaSpec s;
      s.circumference = 0.02 + 0.5 * u(rng);
      s.turns = 1 + static_cast<int>(rng() % 32);
      s.wire_diameter = 1e-4 + 2e-3 * u(rng);
      s.conductivity = 1e7 + 6e7 * u(rng);
      s.wavelength = 0.5 + 20.0 * u(rng);
      s.omega = 2.0 * kPi * (1e6 + 3e8 * u(rng));
      s.directivity = 1.0 + u(rng);
      double rr = radiation_resistance(s);
      double rl = loss_resistance(s);
      double manual_rr = 20.0 * kPi * kPi *
                         std::pow(s.circumference / s.wavelength, 4.0) *
                         s.turns * s.turns;
      double manual_rl =
          (s.turns * s.circumference / (2.0 * kPi * s.wire_diameter)) *
          std::sqrt(s.omega * s.mu0 / (2.0 * s.conductivity));
      double ecd = radiation_efficiency(s);
      identities =
          std::fabs(rr - manual_rr) <= rel * manual_rr &&
          std::fabs(rl - manual_rl) <= rel * manual_rl &&
          std::fabs(ecd - rr / (rr + rl)) <= rel &&
          std::fabs(antenna_gain(s) - ecd * s.directivity) <= rel &&
          std::fabs(effective_aperture(s) -
                    ecd * s.wavelength * s.wavelength * s.directivity /
                        (4.0 * kPi)) <= rel * effective_aperture(s) &&
          std::fabs(antenna_resistance(s) - (rr + rl)) <= rel * (rr + rl);
    }

    AntennaSpec s;
    s.circumference = 0.3;
    s.turns = 1;
    s.wire_diameter = 0.0005;
    s.wavelength = 3.0;
    s.omega = 2.0 * kPi * 100e6;
    bool monotone = true;
    double prev = -1.0;
    auto rows = sweep_turns(s, 1, 64, 1.0, 1.0, 1.0);
    for (const auto& row : rows) {
      if (row.e_cd <= prev) monotone = false;
      prev = row.e_cd;
    }
    prev = -1.0;
    for (int i = 0; i < 64; i++) {
      s.circumference = 0.05 + 0.004 * i;
      double e = radiation_efficiency(s);
      if (e <= prev) monotone = false;
      prev = e;
    }

    double db = magnitude_db(2.0 * 3.0, 3.0);
    bool db_ok = std::fabs(db - 6.0206) <= 1e-4;
    std::ostringstream d;
    d << "closed-form identities " << (identities ? "ok" : "BROKEN")
      << " at 1e-12 rel over 200 random specs, e_cd monotone over 64-point "
         "sweeps "
      << (monotone ? "ok" : "BROKEN") << ", doubling = " << db << " dB";
    return {identities && monotone && db_ok, d.str()};
  });

  criterion(11, "dataset store round-trip and corruption handling",
            [&]() -> Outcome {
    GenConfig cfg = GenConfig::make_default();
    cfg.masked = true;
    cfg.n_profiling = 12;
    cfg.n_attack = 8;
    cfg.samples_per_trace = 256;
    cfg.master_seed = seed + 80;
    TraceSet set = generate_dataset(cfg);

    fs::path root = fs::temp_directory_path() / "spero_acceptance_ds";
    fs::remove_all(root);
    fs::create_directories(root);
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream os;
      os << in.rdbuf();
      return os.str();
    };

    write(set, (root / "a").string());
    TraceSet back = read((root / "a").string());
    write(back, (root / "b").string());
    bool bitwise = true;
    for (const char* f :
         {"manifest.json", "timemap.json", "profiling/power.traces",
          "profiling/em.traces", "profiling/meta.bin", "attack/power.traces",
          "attack/em.traces", "attack/meta.bin"}) {
      if (slurp(root / "a" / f) != slurp(root / "b" / f)) bitwise = false;
    }

    // Corruption 1: truncated traces file -> SizeMismatch.
    fs::path c1 = root / "c1";
    write(set, c1.string());
    {
      std::string bytes = slurp(c1 / "profiling" / "power.traces");
      std::ofstream out(c1 / "profiling" / "power.traces",
                        std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 1));
    }
    bool trunc_named = false;
    try {
      read(c1.string());
    } catch (const SizeMismatch&) {
      trunc_named = true;
    } catch (...) {
    }
    bool trunc_flagged = !validate(c1.string()).ok();

    // Corruption 2: mangled manifest -> CorruptManifest.
    fs::path c2 = root / "c2";
    write(set, c2.string());
    {
      std::ofstream out(c2 / "manifest.json",
                        std::ios::binary | std::ios::trunc);
      out << "{\"version\": }";
    }
    bool manifest_named = false;
    try {
      read(c2.string());
    } catch (const CorruptManifest&) {
      manifest_named = true;
    } catch (...) {
    }
    bool manifest_flagged = !validate(c2.string()).ok();

    // Corruption 3: one EM plaintext byte flipped -> ChannelMisalignment.
    fs::path c3 = root / "c3";
    write(set, c3.string());
    {
      std::string bytes = slurp(c3 / "attack" / "meta.bin");
      size_t record = 8 + 16 + 1;  // attack split stores no key material
      size_t pos = set.attack.n * record + 8;
      bytes[pos] = static_cast<char>(bytes[pos] ^ 0x55);
      std::ofstream out(c3 / "attack" / "meta.bin",
                        std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    bool align_named = false;
    try {
      read(c3.string());
    } catch (const ChannelMisalignment&) {
      align_named = true;
    } catch (...) {
    }
    bool align_flagged = !validate(c3.string()).ok();

    fs::remove_all(root);
    std::ostringstream d;
    d << "bitwise round-trip " << (bitwise ? "ok" : "BROKEN")
      << "; truncation->SizeMismatch " << (trunc_named ? "ok" : "MISSED")
      << ", manifest->CorruptManifest " << (manifest_named ? "ok" : "MISSED")
      << ", em-plaintext->ChannelMisalignment "
      << (align_named ? "ok" : "MISSED") << "; validator flags all three "
      << ((trunc_flagged && manifest_flagged && align_flagged) ? "ok"
                                                               : "MISSED");
    return {bitwise && trunc_named && manifest_named && align_named &&
                trunc_flagged && manifest_flagged && align_flagged,
            d.str()};
  });

  if (g_failures) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
