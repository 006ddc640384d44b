// SPDX-License-Identifier: Apache-2.0
#include "spero/dataset.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "json_util.hpp"

namespace spero {

namespace fs = std::filesystem;
using nlohmann::json;

static constexpr char kMagic[4] = {'S', 'P', 'T', '1'};

namespace {

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; i++) b[i] = static_cast<char>(v >> (8 * i));
  out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; i++) b[i] = static_cast<char>(v >> (8 * i));
  out.write(b, 8);
}

uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

void write_traces_file(const fs::path& path, const std::vector<int16_t>& data,
                       uint64_t n, uint32_t spt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(kMagic, 4);
  put_u64(out, n);
  put_u32(out, spt);
  for (int16_t code : data) {
    char b[2] = {static_cast<char>(code & 0xff),
                 static_cast<char>((code >> 8) & 0xff)};
    out.write(b, 2);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_meta_file(const fs::path& path, const std::vector<TraceMeta>& power,
                     const std::vector<TraceMeta>& em) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  auto put_record = [&](const TraceMeta& m) {
    put_u64(out, m.index);
    out.write(reinterpret_cast<const char*>(m.plaintext.data()), 16);
    uint8_t flags = (m.has_key ? 1 : 0) | (m.has_masks ? 2 : 0);
    out.write(reinterpret_cast<const char*>(&flags), 1);
    if (m.has_key) out.write(reinterpret_cast<const char*>(m.key.data()), 16);
    if (m.has_masks)
      out.write(reinterpret_cast<const char*>(m.masks.data()), 16);
  };
  for (const auto& m : power) put_record(m);
  for (const auto& m : em) put_record(m);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + path.string());
  auto size = in.tellg();
  in.seekg(0);
  std::vector<uint8_t> buf(static_cast<size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(buf.data()), size);
  if (!in) throw IoError("read failed for " + path.string());
  return buf;
}

json manifest_to_json(const Manifest& m) {
  return json{{"version", m.version},
              {"samples_per_trace", m.samples_per_trace},
              {"sample_dtype", m.sample_dtype},
              {"channels", m.channels},
              {"counts",
               {{"profiling", m.count_profiling}, {"attack", m.count_attack}}},
              {"masked", m.masked},
              {"key_present", m.key_present},
              {"masks_present", m.masks_present},
              {"master_seed", m.master_seed},
              {"channel_models",
               {{"power", detail::channel_to_json(m.power_model)},
                {"em", detail::channel_to_json(m.em_model)}}}};
}

Manifest manifest_from_json(const json& j, const std::string& file) {
  try {
    detail::check_keys(j,
                       {"version", "samples_per_trace", "sample_dtype",
                        "channels", "counts", "masked", "key_present",
                        "masks_present", "master_seed", "channel_models"},
                       "manifest");
    Manifest m;
    m.version = j.at("version").get<std::string>();
    m.samples_per_trace = j.at("samples_per_trace").get<uint32_t>();
    m.sample_dtype = j.at("sample_dtype").get<std::string>();
    m.channels = j.at("channels").get<std::vector<std::string>>();
    m.count_profiling = j.at("counts").at("profiling").get<uint64_t>();
    m.count_attack = j.at("counts").at("attack").get<uint64_t>();
    m.masked = j.at("masked").get<bool>();
    m.key_present = j.at("key_present").get<bool>();
    m.masks_present = j.at("masks_present").get<bool>();
    m.master_seed = j.at("master_seed").get<uint64_t>();
    m.power_model = detail::channel_from_json(j.at("channel_models").at("power"));
    m.em_model = detail::channel_from_json(j.at("channel_models").at("em"));
    if (m.sample_dtype != "int16le")
      throw ConfigError("unsupported sample_dtype '" + m.sample_dtype + "'");
    if (m.channels != std::vector<std::string>{"Power", "EM"})
      throw ConfigError("unsupported channel list");
    if (m.samples_per_trace == 0)
      throw ConfigError("samples_per_trace must be > 0");
    if (m.count_profiling % 2 || m.count_attack % 2)
      throw ConfigError("counts must cover both channels (even)");
    return m;
  } catch (const json::exception& e) {
    throw CorruptManifest(file + ": " + e.what());
  } catch (const ConfigError& e) {
    throw CorruptManifest(file + ": " + e.what());
  }
}

json timemap_to_json(const TimeMap& map) {
  json arr = json::array();
  for (const auto& w : map.windows) {
    arr.push_back(json{{"op", op_tag_name(w.op)},
                       {"round", w.round},
                       {"byte", w.byte_index},
                       {"start", w.start},
                       {"end", w.end}});
  }
  return arr;
}

TimeMap timemap_from_json(const json& arr, uint32_t spt,
                          const std::string& file) {
  try {
    TimeMap map;
    map.samples_per_trace = spt;
    for (const auto& e : arr) {
      detail::check_keys(e, {"op", "round", "byte", "start", "end"},
                         "time map entry");
      map.windows.push_back({op_tag_from_name(e.at("op").get<std::string>()),
                             e.at("round").get<int>(),
                             e.at("byte").get<int>(),
                             e.at("start").get<uint32_t>(),
                             e.at("end").get<uint32_t>()});
    }
    map.validate();
    return map;
  } catch (const json::exception& e) {
    throw CorruptManifest(file + ": " + e.what());
  } catch (const ConfigError& e) {
    throw CorruptManifest(file + ": " + e.what());
  }
}

struct TracesFile {
  uint64_t n;
  uint32_t spt;
  std::vector<int16_t> data;
};

TracesFile parse_traces_file(const fs::path& path) {
  auto buf = read_file(path);
  if (buf.size() < 16 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw CorruptManifest(path.string() + ": bad or missing SPT1 magic");
  TracesFile tf;
  tf.n = get_u64(buf.data() + 4);
  tf.spt = get_u32(buf.data() + 12);
  uint64_t expected = 16 + 2 * tf.n * tf.spt;
  if (buf.size() != expected)
    throw SizeMismatch(path.string() + ": expected " + std::to_string(expected) +
                       " bytes, found " + std::to_string(buf.size()));
  tf.data.resize(tf.n * tf.spt);
  for (size_t i = 0; i < tf.data.size(); i++) {
    uint16_t v = static_cast<uint16_t>(buf[16 + 2 * i]) |
                 (static_cast<uint16_t>(buf[16 + 2 * i + 1]) << 8);
    tf.data[i] = static_cast<int16_t>(v);
  }
  return tf;
}

std::vector<TraceMeta> parse_meta_file(const fs::path& path,
                                       uint64_t expected_records) {
  auto buf = read_file(path);
  std::vector<TraceMeta> out;
  size_t pos = 0;
  while (pos < buf.size()) {
    if (buf.size() - pos < 25)
      throw SizeMismatch(path.string() + ": truncated record at offset " +
                         std::to_string(pos));
    TraceMeta m;
    m.index = get_u64(buf.data() + pos);
    pos += 8;
    std::memcpy(m.plaintext.data(), buf.data() + pos, 16);
    pos += 16;
    uint8_t flags = buf[pos++];
    if (flags & ~3u)
      throw CorruptManifest(path.string() + ": bad flags at offset " +
                            std::to_string(pos - 1));
    m.has_key = flags & 1;
    m.has_masks = flags & 2;
    if (m.has_key) {
      if (buf.size() - pos < 16)
        throw SizeMismatch(path.string() + ": truncated key at offset " +
                           std::to_string(pos));
      std::memcpy(m.key.data(), buf.data() + pos, 16);
      pos += 16;
    }
    if (m.has_masks) {
      if (buf.size() - pos < 16)
        throw SizeMismatch(path.string() + ": truncated masks at offset " +
                           std::to_string(pos));
      std::memcpy(m.masks.data(), buf.data() + pos, 16);
      pos += 16;
    }
    out.push_back(m);
  }
  if (out.size() != expected_records)
    throw SizeMismatch(path.string() + ": expected " +
                       std::to_string(expected_records) + " records, found " +
                       std::to_string(out.size()));
  return out;
}

void write_split(const fs::path& dir, const SplitData& sd, uint32_t spt) {
  fs::create_directories(dir);
  write_traces_file(dir / "power.traces", sd.power, sd.n, spt);
  write_traces_file(dir / "em.traces", sd.em, sd.n, spt);
  write_meta_file(dir / "meta.bin", sd.meta_power, sd.meta_em);
}

SplitData read_split(const fs::path& dir, const Manifest& m, uint64_t count,
                     const std::string& split_name) {
  SplitData sd;
  auto p = parse_traces_file(dir / "power.traces");
  auto e = parse_traces_file(dir / "em.traces");
  for (const auto* tf : {&p, &e}) {
    if (tf->spt != m.samples_per_trace)
      throw SizeMismatch(split_name + " traces: samples_per_trace " +
                         std::to_string(tf->spt) + " != manifest " +
                         std::to_string(m.samples_per_trace));
  }
  if (p.n != e.n)
    throw ChannelMisalignment(split_name + ": power holds " +
                              std::to_string(p.n) + " traces, em holds " +
                              std::to_string(e.n));
  if (2 * p.n != count)
    throw SizeMismatch(split_name + ": manifest counts " +
                       std::to_string(count) + " traces, files hold " +
                       std::to_string(2 * p.n));
  auto meta = parse_meta_file(dir / "meta.bin", 2 * p.n);
  sd.n = p.n;
  sd.power = std::move(p.data);
  sd.em = std::move(e.data);
  sd.meta_power.assign(meta.begin(), meta.begin() + p.n);
  sd.meta_em.assign(meta.begin() + p.n, meta.end());
  for (uint64_t i = 0; i < sd.n; i++) {
    if (sd.meta_power[i].plaintext != sd.meta_em[i].plaintext)
      throw ChannelMisalignment(split_name + "/meta.bin: plaintext differs " +
                                "between channels at trace " +
                                std::to_string(i));
  }
  return sd;
}

}  // namespace

void write(const TraceSet& set, const std::string& dir_path) {
  fs::path dir(dir_path);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw IoError(dir_path + " exists and is not a directory");
    if (!fs::is_empty(dir))
      throw IoError("refusing to overwrite non-empty directory " + dir_path);
  }
  fs::path tmp = dir;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  std::ofstream mf(tmp / "manifest.json", std::ios::binary);
  mf << manifest_to_json(set.manifest).dump(2) << "\n";
  if (!mf) throw IoError("write failed for manifest.json");
  mf.close();

  std::ofstream tm(tmp / "timemap.json", std::ios::binary);
  tm << timemap_to_json(set.timemap).dump(2) << "\n";
  if (!tm) throw IoError("write failed for timemap.json");
  tm.close();

  write_split(tmp / "profiling", set.profiling, set.manifest.samples_per_trace);
  write_split(tmp / "attack", set.attack, set.manifest.samples_per_trace);

  if (fs::exists(dir)) fs::remove(dir);  // empty directory: replace atomically
  fs::rename(tmp, dir);
}

TraceSet read(const std::string& dir_path) {
  fs::path dir(dir_path);
  if (!fs::exists(dir / "manifest.json"))
    throw CorruptManifest(dir_path + ": manifest.json missing");
  json mj = json::parse(read_file(dir / "manifest.json"), nullptr, false);
  if (mj.is_discarded())
    throw CorruptManifest(dir_path + "/manifest.json: not valid JSON");

  TraceSet set;
  set.manifest = manifest_from_json(mj, dir_path + "/manifest.json");

  if (!fs::exists(dir / "timemap.json"))
    throw CorruptManifest(dir_path + ": timemap.json missing");
  json tj = json::parse(read_file(dir / "timemap.json"), nullptr, false);
  if (tj.is_discarded() || !tj.is_array())
    throw CorruptManifest(dir_path + "/timemap.json: not a JSON array");
  set.timemap = timemap_from_json(tj, set.manifest.samples_per_trace,
                                  dir_path + "/timemap.json");

  set.profiling = read_split(dir / "profiling", set.manifest,
                             set.manifest.count_profiling, "profiling");
  set.attack = read_split(dir / "attack", set.manifest,
                          set.manifest.count_attack, "attack");
  return set;
}

bool ValidationReport::ok() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

ValidationReport validate(const std::string& dir_path) {
  ValidationReport rep;
  auto add = [&](const std::string& name, bool pass,
                 const std::string& detail) {
    rep.checks.push_back({name, pass, detail});
  };

  fs::path dir(dir_path);
  Manifest m;
  bool manifest_ok = false;
  try {
    if (!fs::exists(dir / "manifest.json"))
      throw CorruptManifest(dir_path + ": manifest.json missing");
    json mj = json::parse(read_file(dir / "manifest.json"), nullptr, false);
    if (mj.is_discarded())
      throw CorruptManifest(dir_path + "/manifest.json: not valid JSON");
    m = manifest_from_json(mj, dir_path + "/manifest.json");
    manifest_ok = true;
    add("manifest", true, "");
  } catch (const Error& e) {
    add("manifest", false, e.what());
  }
  if (!manifest_ok) {
    for (const char* name : {"version", "magic", "size", "channel_alignment",
                             "code_range", "timemap"})
      add(name, false, "not evaluated: manifest unreadable");
    return rep;
  }

  // version: major.minor.patch with a known major
  {
    unsigned a = 0, b = 0, c = 0;
    char tail = 0;
    int got = std::sscanf(m.version.c_str(), "%u.%u.%u%c", &a, &b, &c, &tail);
    bool ok = got == 3 && a == 1;
    add("version", ok,
        ok ? "" : "CorruptManifest: unsupported version '" + m.version + "'");
  }

  {
    bool ok = true;
    std::string detail;
    try {
      if (!fs::exists(dir / "timemap.json"))
        throw CorruptManifest(dir_path + ": timemap.json missing");
      json tj = json::parse(read_file(dir / "timemap.json"), nullptr, false);
      if (tj.is_discarded() || !tj.is_array())
        throw CorruptManifest(dir_path + "/timemap.json: not a JSON array");
      timemap_from_json(tj, m.samples_per_trace, dir_path + "/timemap.json");
    } catch (const Error& e) {
      ok = false;
      detail = e.what();
    }
    add("timemap", ok, detail);
  }

  struct SplitFiles {
    std::string name;
    uint64_t count;
  };
  bool magic_ok = true, size_ok = true, align_ok = true, range_ok = true;
  std::string magic_detail, size_detail, align_detail, range_detail;
  for (const SplitFiles& s :
       {SplitFiles{"profiling", m.count_profiling},
        SplitFiles{"attack", m.count_attack}}) {
    TracesFile chans[2];
    const char* files[2] = {"power.traces", "em.traces"};
    bool parsed[2] = {false, false};
    for (int c = 0; c < 2; c++) {
      fs::path p = dir / s.name / files[c];
      try {
        chans[c] = parse_traces_file(p);
        parsed[c] = true;
        if (chans[c].spt != m.samples_per_trace) {
          size_ok = false;
          if (size_detail.empty())
            size_detail = "SizeMismatch: " + p.string() +
                          " samples_per_trace disagrees with manifest";
        }
      } catch (const CorruptManifest& e) {
        magic_ok = false;
        if (magic_detail.empty()) magic_detail = e.what();
      } catch (const Error& e) {
        size_ok = false;
        if (size_detail.empty()) size_detail = e.what();
      }
    }
    if (parsed[0] && parsed[1]) {
      if (chans[0].n != chans[1].n) {
        align_ok = false;
        if (align_detail.empty())
          align_detail = "ChannelMisalignment: " + s.name +
                         " trace counts differ between channels";
      } else if (2 * chans[0].n != s.count) {
        size_ok = false;
        if (size_detail.empty())
          size_detail = "SizeMismatch: " + s.name + " holds " +
                        std::to_string(2 * chans[0].n) +
                        " traces, manifest says " + std::to_string(s.count);
      } else {
        try {
          auto meta = parse_meta_file(dir / s.name / "meta.bin", s.count);
          for (uint64_t i = 0; i < chans[0].n; i++) {
            if (meta[i].plaintext != meta[chans[0].n + i].plaintext) {
              align_ok = false;
              if (align_detail.empty())
                align_detail = "ChannelMisalignment: " + s.name +
                               "/meta.bin plaintext differs between channels "
                               "at trace " +
                               std::to_string(i);
              break;
            }
          }
        } catch (const Error& e) {
          size_ok = false;
          if (size_detail.empty()) size_detail = e.what();
        }
      }
      const ChannelModel* models[2] = {&m.power_model, &m.em_model};
      for (int c = 0; c < 2 && range_ok; c++) {
        for (size_t i = 0; i < chans[c].data.size(); i++) {
          int16_t code = chans[c].data[i];
          if (code < 0 || code > models[c]->max_code()) {
            range_ok = false;
            range_detail = std::string("code out of quantizer range in ") +
                           s.name + "/" + files[c] + " at sample " +
                           std::to_string(i);
            break;
          }
        }
      }
    }
  }
  add("magic", magic_ok, magic_detail);
  add("size", size_ok, size_detail);
  add("channel_alignment", align_ok, align_detail);
  add("code_range", range_ok, range_detail);
  return rep;
}

}  // namespace spero
