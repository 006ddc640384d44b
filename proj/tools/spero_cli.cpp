// SPDX-License-Identifier: Apache-2.0
//
// spero: command-line front end for the simulator, attacks, leakage
// assessment, MTD evaluation, antenna calculator, and dataset validation.
// All artifacts are deterministic for a given seed; wall-clock timestamps
// are confined to <out>/run.log.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "spero/antenna.hpp"
#include "spero/attack.hpp"
#include "spero/dataset.hpp"
#include "spero/eval.hpp"
#include "spero/leakage.hpp"
#include "spero/report.hpp"
#include "spero/rt_emulator.hpp"
#include "spero/tvla.hpp"

namespace fs = std::filesystem;
using namespace spero;

namespace {

int g_exit_code = 0;

void write_text_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw IoError("cannot write " + path.string());
}

void append_run_log(const fs::path& out_dir, int argc, char** argv) {
  fs::create_directories(out_dir);
  std::ofstream log(out_dir / "run.log", std::ios::app);
  auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%S",
                std::gmtime(&now));
  log << stamp << "Z";
  for (int i = 0; i < argc; i++) log << " " << argv[i];
  log << "\n";
}

GenConfig preset_tvla_fixed_random(uint64_t seed) {
  GenConfig cfg = GenConfig::make_default();
  cfg.policy = PlaintextPolicy::FixedVsRandom;
  cfg.n_profiling = 5000;
  cfg.n_attack = 5000;
  cfg.samples_per_trace = 2000;
  cfg.master_seed = seed;
  return cfg;
}

GenConfig preset_by_name(const std::string& name, uint64_t seed) {
  if (name == "spero-unmasked") return preset_spero_unmasked(seed);
  if (name == "spero-masked") return preset_spero_masked(seed);
  if (name == "tvla-fixed-random") return preset_tvla_fixed_random(seed);
  throw ConfigError("unknown preset '" + name + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

AttackKind kind_from_name(const std::string& s) {
  if (s == "cpa") return AttackKind::Cpa;
  if (s == "dpa") return AttackKind::DpaDom;
  if (s == "second-order") return AttackKind::SecondOrder;
  throw ConfigError("unknown attack kind '" + s + "'");
}

ChannelMode mode_from_name(const std::string& s) {
  if (s == "power") return ChannelMode::Power;
  if (s == "em") return ChannelMode::EM;
  if (s == "combined") return ChannelMode::Combined;
  throw ConfigError("unknown channel mode '" + s + "'");
}

struct GlobalOpts {
  uint64_t seed = 1;
  int threads = 1;
  std::string out = "spero-out";
};

struct AttackFlags {
  std::string kind = "cpa";
  std::string mode = "power";
  int subkey = 0;
  int bit = 0;
  std::vector<int> pair;
  double alpha = -1.0;  // <0: profile it
  int slide = 2;
  std::string summary = "mean";
  std::string model = "byte";
  int single_bit = 0;
  std::string engine = "transform";
  bool full_trace = false;
};

void add_attack_flags(CLI::App* cmd, AttackFlags& f, bool with_pair = true) {
  cmd->add_option("--kind", f.kind, "cpa | dpa | second-order")
      ->capture_default_str();
  cmd->add_option("--mode", f.mode, "power | em | combined")
      ->capture_default_str();
  cmd->add_option("--subkey", f.subkey, "first-order target byte (0-15)")
      ->capture_default_str();
  cmd->add_option("--bit", f.bit, "dpa partition bit (0-7)")
      ->capture_default_str();
  if (with_pair)
    cmd->add_option("--pair", f.pair, "second-order byte pair, e.g. --pair 3 4")
        ->expected(2);
  cmd->add_option("--alpha", f.alpha,
                  "fusion coefficient in [0,1]; profiled when omitted");
  cmd->add_option("--slide", f.slide, "second-order offset search half-width")
      ->capture_default_str();
  cmd->add_option("--summary", f.summary, "window summary: mean | max")
      ->capture_default_str();
  cmd->add_option("--model", f.model, "pair hypothesis: byte | bit")
      ->capture_default_str();
  cmd->add_option("--single-bit", f.single_bit,
                  "bit index for --model bit")
      ->capture_default_str();
  cmd->add_option("--engine", f.engine, "transform | direct")
      ->capture_default_str();
  cmd->add_flag("--full-trace", f.full_trace,
                "first-order attacks read full traces, not mapped windows");
}

AttackSpec spec_from_flags(const AttackFlags& f, bool pair_given,
                           bool kind_given) {
  AttackSpec spec;
  spec.kind = kind_from_name(f.kind);
  if (pair_given && !kind_given) spec.kind = AttackKind::SecondOrder;
  spec.mode = mode_from_name(f.mode);
  spec.subkey = f.subkey;
  spec.target_bit = f.bit;
  if (!f.pair.empty()) {
    spec.pair_i = f.pair[0];
    spec.pair_j = f.pair[1];
  }
  if (f.alpha >= 0.0) spec.alpha = f.alpha;
  spec.second.slide = f.slide;
  spec.second.summary =
      f.summary == "max" ? SummaryKind::PerOffsetMax : SummaryKind::WindowMean;
  if (f.summary != "mean" && f.summary != "max")
    throw ConfigError("summary must be mean or max");
  spec.second.model = f.model == "bit" ? HypothesisModel::SingleBit
                                       : HypothesisModel::FullByteHW;
  if (f.model != "byte" && f.model != "bit")
    throw ConfigError("model must be byte or bit");
  spec.second.single_bit = f.single_bit;
  if (f.engine == "direct")
    spec.second.engine = ScoreEngine::Direct;
  else if (f.engine != "transform")
    throw ConfigError("engine must be transform or direct");
  spec.restrict_windows = !f.full_trace;
  spec.validate();
  return spec;
}

std::string echo_line(const GlobalOpts& g, const std::string& rest) {
  std::ostringstream os;
  os << "seed=" << g.seed << " threads=" << g.threads << " " << rest;
  return os.str();
}

void run_jobs(int threads, size_t count,
              const std::function<void(size_t)>& job) {
  if (threads <= 1 || count <= 1) {
    for (size_t i = 0; i < count; i++) job(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < count; i = next++) job(i);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads && t < static_cast<int>(count); t++)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"side-channel analysis toolkit: dual-channel AES trace "
               "simulation, first/second-order attacks, TVLA, MTD "
               "evaluation, and loop-antenna design math"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate a trace dataset");
  struct {
    std::string preset, config;
    uint64_t n_profiling = 0, n_attack = 0;
    uint32_t spt = 0;
    double jitter = -1.0;
    bool masked = false, unmasked = false, store_key = false;
  } sim_f;
  sim->add_option("--preset", sim_f.preset,
                  "spero-unmasked | spero-masked | tvla-fixed-random");
  sim->add_option("--config", sim_f.config, "generator config JSON file");
  sim->add_option("--n-profiling", sim_f.n_profiling,
                  "profiling encryptions override");
  sim->add_option("--n-attack", sim_f.n_attack, "attack encryptions override");
  sim->add_option("--spt", sim_f.spt, "samples per trace override");
  sim->add_option("--jitter", sim_f.jitter,
                  "jitter stddev as a fraction of trace length");
  sim->add_flag("--masked", sim_f.masked, "force the masked implementation");
  sim->add_flag("--unmasked", sim_f.unmasked, "force the unmasked implementation");
  sim->add_flag("--store-key-in-attack", sim_f.store_key,
                "keep key material in attack-split metadata");
  sim->callback([&] {
    append_run_log(g.out, argc, argv);
    GenConfig cfg;
    if (!sim_f.preset.empty() && !sim_f.config.empty())
      throw ConfigError("--preset and --config are mutually exclusive");
    if (!sim_f.preset.empty())
      cfg = preset_by_name(sim_f.preset, g.seed);
    else if (!sim_f.config.empty())
      cfg = gen_config_from_json_text(read_text_file(sim_f.config));
    else
      throw ConfigError("choose --preset or --config");
    cfg.master_seed = g.seed;
    if (sim_f.n_profiling) cfg.n_profiling = sim_f.n_profiling;
    if (sim_f.n_attack) cfg.n_attack = sim_f.n_attack;
    if (sim_f.spt) cfg.samples_per_trace = sim_f.spt;
    if (sim_f.jitter >= 0.0) {
      cfg.power.jitter_pct = sim_f.jitter;
      cfg.em.jitter_pct = sim_f.jitter;
    }
    if (sim_f.masked && sim_f.unmasked)
      throw ConfigError("--masked and --unmasked are mutually exclusive");
    if (sim_f.masked) cfg.masked = true;
    if (sim_f.unmasked) cfg.masked = false;

    TraceSet set = generate_dataset(cfg);
    std::string dir = (fs::path(g.out) / "dataset").string();
    write(set, dir);
    write_text_file(fs::path(g.out) / "config.json",
                    gen_config_to_json_text(cfg));
    std::cout << "dataset written to " << dir << " (profiling "
              << set.manifest.count_profiling << " traces, attack "
              << set.manifest.count_attack << " traces)\n";
  });

  // ---- attack ----
  auto* atk = app.add_subcommand("attack", "run a key-recovery attack");
  std::string atk_dataset;
  AttackFlags atk_f;
  bool atk_rt = false;
  int atk_budget = 64, atk_int_width = 64;
  atk->add_option("--dataset", atk_dataset, "dataset directory")->required();
  add_attack_flags(atk, atk_f);
  atk->add_flag("--rt", atk_rt,
                "integer-only streaming DPA (device emulation)");
  atk->add_option("--feature-budget", atk_budget,
                  "features kept by the streaming attack")
      ->capture_default_str();
  atk->add_option("--int-width", atk_int_width,
                  "accumulator width for the streaming attack: 32 | 64")
      ->capture_default_str();
  atk->callback([&] {
    append_run_log(g.out, argc, argv);
    TraceSet set = read(atk_dataset);
    AttackSpec spec = spec_from_flags(atk_f, atk->count("--pair") > 0,
                                      atk->count("--kind") > 0);
    HypothesisScore score;
    double alpha_used = -1.0;
    if (atk_rt) {
      if (spec.kind == AttackKind::SecondOrder)
        throw ConfigError("the streaming attack is first-order only");
      if (spec.mode == ChannelMode::Combined)
        throw ConfigError("the streaming attack reads a single channel");
      Trace::Channel ch = spec.mode == ChannelMode::Power
                              ? Trace::Channel::Power
                              : Trace::Channel::EM;
      auto features =
          rt_select_features(set, ch, spec.subkey, atk_budget);
      RtDpaAccumulator acc(features, spec.subkey, spec.target_bit,
                           atk_int_width);
      const auto& src = spec.mode == ChannelMode::Power ? set.attack.power
                                                        : set.attack.em;
      const uint32_t spt = set.manifest.samples_per_trace;
      std::vector<int16_t> row(features.size());
      for (size_t t = 0; t < set.attack.n; t++) {
        for (size_t f = 0; f < features.size(); f++)
          row[f] = src[t * spt + features[f]];
        acc.stream_trace(row, set.attack.meta_power[t].plaintext);
      }
      score = acc.rank_without_division();
      std::cout << "streamed " << acc.traces_consumed() << " traces over "
                << features.size() << " features ("
                << acc.footprint_bytes() << " bytes resident)\n";
    } else {
      AttackRunner runner(set, spec);
      score = runner.run(nullptr);
      if (spec.mode == ChannelMode::Combined) alpha_used = runner.alpha_used();
    }
    write_text_file(fs::path(g.out) / "attack.csv", hypothesis_csv(score));
    std::cout << "best candidate: " << score.best << " (score "
              << score.scores[score.best] << ")\n";
    if (alpha_used >= 0.0) std::cout << "alpha: " << alpha_used << "\n";
    try {
      AttackRunner probe(set, spec);
      std::cout << "true candidate rank: " << score.rank_of(probe.truth()) + 1
                << " of " << score.scores.size() << "\n";
    } catch (const MissingKey&) {
      std::cout << "true candidate unknown (no key in profiling split)\n";
    }
    std::cout << "scores written to " << (fs::path(g.out) / "attack.csv").string()
              << " (" << score.scores.size() << " candidates)\n";
  });

  // ---- tvla ----
  auto* tv = app.add_subcommand("tvla", "fixed-vs-random leakage assessment");
  struct {
    std::string config;
    uint64_t n_fixed = 5000, n_random = 5000;
    uint32_t spt = 2000;
    double threshold = 4.5, jitter = -1.0;
    bool masked = false;
  } tv_f;
  tv->add_option("--config", tv_f.config, "generator config JSON file");
  tv->add_option("--n-fixed", tv_f.n_fixed, "fixed-group traces")
      ->capture_default_str();
  tv->add_option("--n-random", tv_f.n_random, "random-group traces")
      ->capture_default_str();
  tv->add_option("--spt", tv_f.spt, "samples per trace")
      ->capture_default_str();
  tv->add_option("--threshold", tv_f.threshold, "|t| verdict threshold")
      ->capture_default_str();
  tv->add_option("--jitter", tv_f.jitter, "jitter fraction override");
  tv->add_flag("--masked", tv_f.masked, "assess the masked implementation");
  tv->callback([&] {
    append_run_log(g.out, argc, argv);
    GenConfig cfg = GenConfig::make_default();
    if (!tv_f.config.empty())
      cfg = gen_config_from_json_text(read_text_file(tv_f.config));
    cfg.master_seed = g.seed;
    cfg.policy = PlaintextPolicy::FixedVsRandom;
    if (tv->count("--spt") || tv_f.config.empty())
      cfg.samples_per_trace = tv_f.spt;
    if (tv->count("--masked")) cfg.masked = tv_f.masked;
    if (tv_f.jitter >= 0.0) {
      cfg.power.jitter_pct = tv_f.jitter;
      cfg.em.jitter_pct = tv_f.jitter;
    }
    std::ostringstream echo;
    echo << echo_line(g, "cmd=tvla") << " masked=" << cfg.masked
         << " n_fixed=" << tv_f.n_fixed << " n_random=" << tv_f.n_random
         << " spt=" << cfg.samples_per_trace;
    TvlaPair pair = tvla_run(cfg, tv_f.n_fixed, tv_f.n_random,
                             tv_f.threshold);
    write_text_file(fs::path(g.out) / "tvla_power.csv",
                    tvla_csv(pair.power, echo.str()));
    write_text_file(fs::path(g.out) / "tvla_em.csv",
                    tvla_csv(pair.em, echo.str()));
    write_text_file(fs::path(g.out) / "tvla_power.svg",
                    tvla_svg(pair.power, "t-test, power channel"));
    write_text_file(fs::path(g.out) / "tvla_em.svg",
                    tvla_svg(pair.em, "t-test, EM channel"));
    std::cout << "power: max|t| = " << pair.power.max_abs_t << " -> "
              << (pair.power.pass ? "pass" : "fail") << "\n";
    std::cout << "em:    max|t| = " << pair.em.max_abs_t << " -> "
              << (pair.em.pass ? "pass" : "fail") << "\n";
  });

  // ---- mtd ----
  auto* md = app.add_subcommand(
      "mtd", "success-rate curves and measurements-to-disclosure");
  std::string md_dataset, md_grid, md_mode = "power";
  AttackFlags md_f;
  bool md_all_subkeys = false, md_all_pairs = false;
  int md_repeats = 20;
  uint64_t md_lo = 0, md_hi = 0;
  md->add_option("--dataset", md_dataset, "dataset directory")->required();
  add_attack_flags(md, md_f);
  md->add_option("--grid", md_grid, "comma-separated trace counts");
  md->add_option("--grid-lo", md_lo, "geometric grid start");
  md->add_option("--grid-hi", md_hi, "geometric grid end");
  md->add_option("--repeats", md_repeats, "subsamples per grid point")
      ->capture_default_str();
  md->add_flag("--all-subkeys", md_all_subkeys, "evaluate subkeys 0-15");
  md->add_flag("--all-pairs", md_all_pairs,
               "evaluate pairs (0,1),(2,3),...,(14,15)");
  md->callback([&] {
    append_run_log(g.out, argc, argv);
    TraceSet set = read(md_dataset);
    md_mode = md_f.mode;

    std::vector<uint64_t> grid;
    if (!md_grid.empty()) {
      std::istringstream is(md_grid);
      std::string tok;
      while (std::getline(is, tok, ',')) grid.push_back(std::stoull(tok));
    } else if (md_lo && md_hi) {
      grid = geometric_grid(md_lo, md_hi);
    } else {
      grid = geometric_grid(10, set.attack.n);
    }

    AttackSpec base = spec_from_flags(md_f, md->count("--pair") > 0,
                                      md->count("--kind") > 0);
    if (md_all_pairs) base.kind = AttackKind::SecondOrder;
    std::vector<AttackSpec> jobs;
    std::vector<ChannelMode> modes;
    if (md_mode == "all")
      modes = {ChannelMode::Power, ChannelMode::EM, ChannelMode::Combined};
    else
      modes = {mode_from_name(md_mode)};
    for (ChannelMode mode : modes) {
      AttackSpec spec = base;
      spec.mode = mode;
      if (base.kind == AttackKind::SecondOrder) {
        if (md_all_pairs) {
          for (int i = 0; i < 16; i += 2) {
            spec.pair_i = i;
            spec.pair_j = i + 1;
            jobs.push_back(spec);
          }
        } else {
          jobs.push_back(spec);
        }
      } else if (md_all_subkeys) {
        for (int s = 0; s < 16; s++) {
          spec.subkey = s;
          jobs.push_back(spec);
        }
      } else {
        jobs.push_back(spec);
      }
    }

    std::vector<MtdResult> results(jobs.size());
    run_jobs(g.threads, jobs.size(), [&](size_t i) {
      results[i] = mtd(jobs[i], set, grid, md_repeats, g.seed);
    });

    std::ostringstream echo;
    echo << echo_line(g, "cmd=mtd") << " dataset=" << md_dataset
         << " kind=" << md_f.kind << " repeats=" << md_repeats << " grid=";
    for (size_t i = 0; i < grid.size(); i++)
      echo << (i ? "," : "") << grid[i];
    write_text_file(fs::path(g.out) / "mtd.csv",
                    mtd_table_csv(results, echo.str()));
    write_text_file(fs::path(g.out) / "mtd.md",
                    mtd_table_markdown(results, echo.str()));
    write_text_file(fs::path(g.out) / "success.svg",
                    success_curves_svg(results, "success rate vs traces"));
    std::cout << mtd_table_markdown(results, "");
  });

  // ---- antenna ----
  auto* an = app.add_subcommand("antenna",
                                "loop antenna design calculator");
  struct {
    double c = 0.08, b = 0.001, sigma = 5.8e7, lambda = 18.75;
    double freq = 16e6, directivity = 1.5, r_inst = 50.0, r_ant = 0.0;
    double p_t = 1.0, r_dist = 1.0, sigma_rcs = 1.0;
    double v_test = 0.0, v_ref = 3.0;
    int turns = 4;
    std::string sweep;
  } an_f;
  an->add_option("--circumference", an_f.c, "loop circumference C, m")
      ->capture_default_str();
  an->add_option("--turns", an_f.turns, "turn count N")->capture_default_str();
  an->add_option("--wire-diameter", an_f.b, "wire diameter b, m")
      ->capture_default_str();
  an->add_option("--conductivity", an_f.sigma, "wire conductivity, S/m")
      ->capture_default_str();
  an->add_option("--wavelength", an_f.lambda, "operating wavelength, m")
      ->capture_default_str();
  an->add_option("--frequency", an_f.freq, "operating frequency, Hz")
      ->capture_default_str();
  an->add_option("--directivity", an_f.directivity, "directivity D")
      ->capture_default_str();
  an->add_option("--r-inst", an_f.r_inst, "instrument load, ohm")
      ->capture_default_str();
  an->add_option("--r-ant", an_f.r_ant,
                 "antenna resistance override, ohm (0: R_r + R_L)");
  an->add_option("--p-t", an_f.p_t, "transmit power, W")
      ->capture_default_str();
  an->add_option("--r-dist", an_f.r_dist, "probe distance, m")
      ->capture_default_str();
  an->add_option("--sigma-rcs", an_f.sigma_rcs, "radar cross-section term")
      ->capture_default_str();
  an->add_option("--v-test", an_f.v_test,
                 "report 20*log10(v_test/v_ref) when set");
  an->add_option("--v-ref", an_f.v_ref, "reference voltage, V")
      ->capture_default_str();
  an->add_option("--sweep", an_f.sweep, "turn sweep, e.g. N=1..8");
  an->callback([&] {
    append_run_log(g.out, argc, argv);
    AntennaSpec spec;
    spec.circumference = an_f.c;
    spec.turns = an_f.turns;
    spec.wire_diameter = an_f.b;
    spec.conductivity = an_f.sigma;
    spec.wavelength = an_f.lambda;
    spec.omega = 2.0 * kPi * an_f.freq;
    spec.directivity = an_f.directivity;
    spec.r_inst = an_f.r_inst;
    if (an_f.r_ant > 0.0) spec.r_ant = an_f.r_ant;

    if (!an_f.sweep.empty()) {
      int lo = 0, hi = 0;
      if (std::sscanf(an_f.sweep.c_str(), "N=%d..%d", &lo, &hi) != 2)
        throw ConfigError("--sweep expects the form N=<lo>..<hi>");
      auto rows = sweep_turns(spec, lo, hi, an_f.p_t, an_f.r_dist,
                              an_f.sigma_rcs);
      std::string csv = antenna_sweep_csv(rows);
      write_text_file(fs::path(g.out) / "antenna.csv", csv);
      std::cout << csv;
      return;
    }
    std::cout << "R_r    = " << radiation_resistance(spec) << " ohm\n";
    std::cout << "R_L    = " << loss_resistance(spec) << " ohm\n";
    std::cout << "e_cd   = " << radiation_efficiency(spec) << "\n";
    std::cout << "G      = " << antenna_gain(spec) << "\n";
    std::cout << "A_e    = " << effective_aperture(spec) << " m^2\n";
    double pr = received_power(spec, an_f.p_t, an_f.r_dist, an_f.sigma_rcs);
    std::cout << "P_r    = " << pr << " W\n";
    std::cout << "V_inst = "
              << instrument_voltage(pr, antenna_resistance(spec), spec.r_inst)
              << " V\n";
    if (an_f.v_test > 0.0)
      std::cout << "I      = " << magnitude_db(an_f.v_test, an_f.v_ref)
                << " dB\n";
  });

  // ---- dataset-validate ----
  auto* dv = app.add_subcommand("dataset-validate",
                                "check a dataset directory for corruption");
  std::string dv_path;
  dv->add_option("path", dv_path, "dataset directory")->required();
  dv->callback([&] {
    ValidationReport rep = validate(dv_path);
    std::cout << validation_report_text(rep);
    if (!rep.ok()) g_exit_code = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "Error: " << e.what() << "\n";
    return 1;
  }
  return g_exit_code;
}
