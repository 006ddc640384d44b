// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spero/dataset.hpp"
#include "spero/leakage.hpp"

namespace fs = std::filesystem;
using namespace spero;

namespace {

TraceSet small_set(uint64_t seed = 77, bool masked = false) {
  GenConfig cfg = GenConfig::make_default();
  cfg.masked = masked;
  cfg.n_profiling = 6;
  cfg.n_attack = 4;
  cfg.samples_per_trace = 256;
  cfg.master_seed = seed;
  return generate_dataset(cfg);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("spero_test_" + tag)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool check_failed(const ValidationReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name && !c.pass) return true;
  return false;
}

const char* kFiles[] = {"manifest.json",
                        "timemap.json",
                        "profiling/power.traces",
                        "profiling/em.traces",
                        "profiling/meta.bin",
                        "attack/power.traces",
                        "attack/em.traces",
                        "attack/meta.bin"};

}  // namespace

TEST_CASE("round-trip preserves every byte") {
  TraceSet set = small_set(77, true);
  TempDir d1("rt1"), d2("rt2");
  write(set, d1.str());
  TraceSet back = read(d1.str());
  write(back, d2.str());
  for (const char* f : kFiles) {
    CAPTURE(f);
    CHECK(slurp(d1.path / f) == slurp(d2.path / f));
  }
  CHECK(back.profiling.power == set.profiling.power);
  CHECK(back.attack.em == set.attack.em);
  CHECK(back.manifest.master_seed == set.manifest.master_seed);
  CHECK(back.profiling.meta_power[2].plaintext ==
        set.profiling.meta_power[2].plaintext);
  CHECK(back.profiling.meta_power[2].masks ==
        set.profiling.meta_power[2].masks);
  CHECK(back.timemap.windows.size() == set.timemap.windows.size());

  ValidationReport rep = validate(d1.str());
  for (const auto& c : rep.checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
  CHECK(rep.ok());
}

TEST_CASE("writer refuses a non-empty target") {
  TraceSet set = small_set();
  TempDir d("nonempty");
  fs::create_directories(d.path);
  spit(d.path / "stray.txt", {'x'});
  CHECK_THROWS_AS(write(set, d.str()), IoError);
}

TEST_CASE("reading a missing directory fails on the manifest") {
  CHECK_THROWS_AS(read("/nonexistent/spero/set"), CorruptManifest);
}

TEST_CASE("garbage manifest is reported and stops validation") {
  TraceSet set = small_set();
  TempDir d("badmanifest");
  write(set, d.str());
  spit(d.path / "manifest.json", {'{', 'o', 'o', 'p', 's'});
  CHECK_THROWS_AS(read(d.str()), CorruptManifest);
  ValidationReport rep = validate(d.str());
  CHECK_FALSE(rep.ok());
  CHECK(check_failed(rep, "manifest"));
}

TEST_CASE("truncated traces file names itself") {
  TraceSet set = small_set();
  TempDir d("trunc");
  write(set, d.str());
  auto bytes = slurp(d.path / "profiling" / "power.traces");
  bytes.resize(bytes.size() - 10);
  spit(d.path / "profiling" / "power.traces", bytes);
  try {
    read(d.str());
    FAIL("expected SizeMismatch");
  } catch (const SizeMismatch& e) {
    CHECK(std::string(e.what()).find("power.traces") != std::string::npos);
  }
  ValidationReport rep = validate(d.str());
  CHECK_FALSE(rep.ok());
  CHECK(check_failed(rep, "size"));
}

TEST_CASE("manifest trace counts must match the files") {
  TraceSet set = small_set();
  TempDir d("count");
  write(set, d.str());
  auto j = nlohmann::json::parse(std::string(
      slurp(d.path / "manifest.json").data(),
      slurp(d.path / "manifest.json").size()));
  j["counts"]["profiling"] = 98;  // even (covers both channels) but wrong
  std::string text = j.dump(2) + "\n";
  spit(d.path / "manifest.json", std::vector<char>(text.begin(), text.end()));
  CHECK_THROWS_AS(read(d.str()), SizeMismatch);
  ValidationReport rep = validate(d.str());
  CHECK_FALSE(rep.ok());
  CHECK(check_failed(rep, "size"));

  // An odd count can never describe two aligned channels.
  j["counts"]["profiling"] = 99;
  text = j.dump(2) + "\n";
  spit(d.path / "manifest.json", std::vector<char>(text.begin(), text.end()));
  CHECK_THROWS_AS(read(d.str()), CorruptManifest);
}

TEST_CASE("swapped em plaintext trips channel alignment") {
  TraceSet set = small_set();  // unmasked, profiling has keys: 41-byte records
  TempDir d("align");
  write(set, d.str());
  auto bytes = slurp(d.path / "profiling" / "meta.bin");
  size_t record = 8 + 16 + 1 + 16;
  size_t first_em_pt = set.profiling.n * record + 8;
  bytes[first_em_pt] = static_cast<char>(bytes[first_em_pt] ^ 0xff);
  spit(d.path / "profiling" / "meta.bin", bytes);
  try {
    read(d.str());
    FAIL("expected ChannelMisalignment");
  } catch (const ChannelMisalignment& e) {
    CHECK(std::string(e.what()).find("0") != std::string::npos);
  }
  ValidationReport rep = validate(d.str());
  CHECK_FALSE(rep.ok());
  CHECK(check_failed(rep, "channel_alignment"));
}

TEST_CASE("bad trace magic is a corruption") {
  TraceSet set = small_set();
  TempDir d("magic");
  write(set, d.str());
  auto bytes = slurp(d.path / "attack" / "em.traces");
  bytes[0] = 'X';
  spit(d.path / "attack" / "em.traces", bytes);
  CHECK_THROWS_AS(read(d.str()), CorruptManifest);
  ValidationReport rep = validate(d.str());
  CHECK_FALSE(rep.ok());
  CHECK(check_failed(rep, "magic"));
}

TEST_CASE("unknown meta flags are a corruption") {
  TraceSet set = small_set();
  TempDir d("flags");
  write(set, d.str());
  auto bytes = slurp(d.path / "profiling" / "meta.bin");
  bytes[8 + 16] = static_cast<char>(0xff);
  spit(d.path / "profiling" / "meta.bin", bytes);
  CHECK_THROWS_AS(read(d.str()), CorruptManifest);
}

TEST_CASE("out-of-range sample codes fail validation only") {
  TraceSet set = small_set();
  TempDir d("codes");
  write(set, d.str());
  auto bytes = slurp(d.path / "profiling" / "power.traces");
  // Header is magic + u64 count + u32 spt = 16 bytes; patch sample 0 to -5.
  bytes[16] = static_cast<char>(0xfb);
  bytes[17] = static_cast<char>(0xff);
  spit(d.path / "profiling" / "power.traces", bytes);
  TraceSet back = read(d.str());  // range is a validator concern, not a parse error
  CHECK(back.profiling.power[0] == -5);
  ValidationReport rep = validate(d.str());
  CHECK_FALSE(rep.ok());
  CHECK(check_failed(rep, "code_range"));
}

TEST_CASE("split accessor selects the right half") {
  TraceSet set = small_set();
  CHECK(&set.split(false) == &set.profiling);
  CHECK(&set.split(true) == &set.attack);
}
