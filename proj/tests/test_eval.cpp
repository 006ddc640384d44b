// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spero/eval.hpp"

using namespace spero;

namespace {

TraceSet strong_fixture(uint64_t seed = 91, bool masked = false,
                        uint64_t n_attack = 600) {
  GenConfig cfg = GenConfig::make_default();
  for (int i = 0; i < 16; i++) cfg.key[i] = static_cast<uint8_t>(0x10 + i);
  cfg.masked = masked;
  cfg.n_profiling = 80;
  cfg.n_attack = n_attack;
  cfg.samples_per_trace = 256;
  cfg.master_seed = seed;
  return generate_dataset(cfg);
}

}  // namespace

TEST_CASE("window columns collect the round-1 samples for a byte") {
  TimeMap map = default_timemap(256);
  auto cols = window_columns(map, 3);
  REQUIRE(cols.size() == 10);
  // base 32; AddRoundKey window 3 starts at 32+18, Sbox window 3 at 32+19*6.
  for (int s = 0; s < 5; s++) {
    CHECK(cols[s] == 50 + s);
    CHECK(cols[5 + s] == 146 + s);
  }
}

TEST_CASE("matrix extraction recenters to volts") {
  TraceSet set = strong_fixture(12, false, 8);
  std::vector<uint32_t> cols = {40, 41};
  TraceMatrix m = extract_matrix(set.attack, set.manifest.power_model,
                                 Trace::Channel::Power, cols);
  REQUIRE(m.n == 8);
  REQUIRE(m.width == 2);
  const ChannelModel& pm = set.manifest.power_model;
  for (size_t t = 0; t < m.n; t++) {
    for (size_t c = 0; c < 2; c++) {
      int16_t code = set.attack.power[t * 256 + cols[c]];
      CHECK(m.row(t)[c] ==
            doctest::Approx(dequantize(pm, code) - pm.offset).epsilon(1e-12));
    }
  }
  TraceMatrix full = extract_matrix(set.attack, set.manifest.em_model,
                                    Trace::Channel::EM, {});
  CHECK(full.width == 256);
  auto pts = extract_plaintexts(set.attack);
  REQUIRE(pts.size() == 8);
  CHECK(pts[0] == set.attack.meta_power[0].plaintext);
}

TEST_CASE("attack spec validation and description") {
  AttackSpec spec;
  spec.subkey = 16;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = AttackSpec{};
  spec.target_bit = -1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = AttackSpec{};
  spec.kind = AttackKind::SecondOrder;
  spec.pair_i = 3;
  spec.pair_j = 3;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = AttackSpec{};
  spec.alpha = 1.2;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = AttackSpec{};
  spec.kind = AttackKind::Cpa;
  spec.mode = ChannelMode::EM;
  spec.subkey = 5;
  spec.validate();
  std::string d = spec.describe();
  CHECK(d.find("cpa") != std::string::npos);
  CHECK(d.find("em") != std::string::npos);
  CHECK(d.find("5") != std::string::npos);
}

TEST_CASE("runner recovers first-order subkeys on a strong set") {
  TraceSet set = strong_fixture();
  for (auto mode : {ChannelMode::Power, ChannelMode::EM, ChannelMode::Combined}) {
    AttackSpec spec;
    spec.kind = AttackKind::Cpa;
    spec.mode = mode;
    spec.subkey = 7;
    AttackRunner runner(set, spec);
    CHECK(runner.truth() == 0x17);
    CHECK(runner.available() == set.attack.n);
    auto score = runner.run(nullptr);
    CHECK(score.best == 0x17);
    CHECK(runner.succeeds(nullptr));
    if (mode == ChannelMode::Combined) {
      CHECK(runner.alpha_used() >= 0.0);
      CHECK(runner.alpha_used() <= 1.0);
    }
  }

  AttackSpec dpa;
  dpa.kind = AttackKind::DpaDom;
  dpa.subkey = 7;
  dpa.target_bit = 2;
  AttackRunner runner(set, dpa);
  CHECK(runner.run(nullptr).best == 0x17);
}

TEST_CASE("runner scores an explicit subset only") {
  TraceSet set = strong_fixture();
  AttackSpec spec;
  spec.kind = AttackKind::Cpa;
  spec.subkey = 0;
  AttackRunner runner(set, spec);
  std::vector<uint32_t> subset;
  for (uint32_t i = 0; i < 300; i++) subset.push_back(i);
  auto a = runner.run(&subset);
  auto b = runner.run(&subset);
  CHECK(a.scores == b.scores);  // same subset, same result
  std::vector<uint32_t> other;
  for (uint32_t i = 300; i < 600; i++) other.push_back(i);
  auto c = runner.run(&other);
  CHECK(a.scores != c.scores);
}

TEST_CASE("second-order truth is the packed key pair") {
  TraceSet set = strong_fixture(77, true, 64);
  AttackSpec spec;
  spec.kind = AttackKind::SecondOrder;
  spec.pair_i = 2;
  spec.pair_j = 3;
  spec.second.slide = 0;
  AttackRunner runner(set, spec);
  CHECK(runner.truth() == ((0x12u << 8) | 0x13u));
}

TEST_CASE("missing key surfaces as the named error") {
  TraceSet set = strong_fixture(5, false, 32);
  for (auto& m : set.profiling.meta_power) m.has_key = false;
  AttackSpec spec;
  spec.kind = AttackKind::Cpa;
  // Ground truth resolves when the runner binds to the set.
  CHECK_THROWS_AS(AttackRunner(set, spec), MissingKey);
}

TEST_CASE("success rate is deterministic and saturates on a strong set") {
  TraceSet set = strong_fixture();
  AttackSpec spec;
  spec.kind = AttackKind::Cpa;
  spec.subkey = 2;
  double r1 = success_rate(spec, set, 400, 10, 42);
  double r2 = success_rate(spec, set, 400, 10, 42);
  CHECK(r1 == r2);
  CHECK(r1 == doctest::Approx(1.0));
  CHECK_THROWS_AS(success_rate(spec, set, 601, 10, 42), InsufficientTraces);
  CHECK_THROWS_AS(success_rate(spec, set, 0, 10, 42), ConfigError);
}

TEST_CASE("mtd scans the grid and reports the first saturated point") {
  TraceSet set = strong_fixture();
  AttackSpec spec;
  spec.kind = AttackKind::Cpa;
  spec.subkey = 11;
  std::vector<uint64_t> grid = {5, 10, 30, 80, 200, 400, 600};
  MtdResult res = mtd(spec, set, grid, 10, 99);
  CHECK(res.grid == grid);
  REQUIRE(res.mtd.has_value());
  CHECK(*res.mtd <= 400);
  size_t at = 0;
  while (grid[at] != *res.mtd) at++;
  CHECK(res.rates[at] == doctest::Approx(1.0));
  for (size_t i = at + 1; i < grid.size(); i++) CHECK(std::isnan(res.rates[i]));
  if (at > 0) CHECK(res.rates[at - 1] >= 0.0);

  std::vector<uint64_t> bad = {30, 10, 20};
  CHECK_THROWS_AS(mtd(spec, set, bad, 10, 99), ConfigError);
  std::vector<uint64_t> empty;
  CHECK_THROWS_AS(mtd(spec, set, empty, 10, 99), ConfigError);
}

TEST_CASE("mtd reports not-reached on a hopeless attack") {
  TraceSet set = strong_fixture(31, true, 300);  // masked: first order fails
  AttackSpec spec;
  spec.kind = AttackKind::Cpa;
  spec.subkey = 0;
  std::vector<uint64_t> grid = {50, 120, 300};
  MtdResult res = mtd(spec, set, grid, 8, 7);
  CHECK_FALSE(res.mtd.has_value());
  for (double r : res.rates) {
    CHECK_FALSE(std::isnan(r));
    CHECK(r < 1.0);
  }
}

TEST_CASE("geometric grid endpoints and monotonicity") {
  auto g = geometric_grid(10, 1000, 10);
  CHECK(g.front() == 10);
  CHECK(g.back() == 1000);
  for (size_t i = 1; i < g.size(); i++) CHECK(g[i] > g[i - 1]);
  CHECK(g[1] == 13);
  CHECK(g[2] == 16);

  auto single = geometric_grid(5, 5, 10);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 5);

  auto forced = geometric_grid(10, 17, 10);
  CHECK(forced.back() == 17);
  CHECK_THROWS_AS(geometric_grid(0, 10, 10), ConfigError);
  CHECK_THROWS_AS(geometric_grid(100, 10, 10), ConfigError);
}

TEST_CASE("names for kinds and modes") {
  CHECK(std::string(attack_kind_name(AttackKind::Cpa)) == "cpa");
  CHECK(std::string(attack_kind_name(AttackKind::DpaDom)) == "dpa");
  CHECK(std::string(attack_kind_name(AttackKind::SecondOrder)) ==
        "second-order");
  CHECK(std::string(channel_mode_name(ChannelMode::Power)) == "power");
  CHECK(std::string(channel_mode_name(ChannelMode::EM)) == "em");
  CHECK(std::string(channel_mode_name(ChannelMode::Combined)) == "combined");
}
