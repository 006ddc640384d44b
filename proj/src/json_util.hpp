// SPDX-License-Identifier: Apache-2.0
// Internal JSON helpers shared by the generator-config and manifest code.
#pragma once

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "spero/common.hpp"
#include "spero/leakage.hpp"

namespace spero::detail {

inline void check_keys(const nlohmann::json& j,
                       std::initializer_list<const char*> keys,
                       const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known)
      throw ConfigError(std::string("unknown ") + what + " field '" +
                        it.key() + "'");
  }
}

inline ChannelModel channel_from_json(const nlohmann::json& j) {
  check_keys(j, {"gain", "offset", "noise_sigma", "quant_bits", "v_min",
                 "v_max", "jitter_pct"},
             "channel model");
  ChannelModel ch;
  ch.gain = j.at("gain").get<double>();
  ch.offset = j.at("offset").get<double>();
  ch.noise_sigma = j.at("noise_sigma").get<double>();
  ch.quant_bits = j.at("quant_bits").get<int>();
  ch.v_min = j.at("v_min").get<double>();
  ch.v_max = j.at("v_max").get<double>();
  ch.jitter_pct = j.at("jitter_pct").get<double>();
  ch.validate();
  return ch;
}

inline nlohmann::json channel_to_json(const ChannelModel& ch) {
  return nlohmann::json{{"gain", ch.gain},
                        {"offset", ch.offset},
                        {"noise_sigma", ch.noise_sigma},
                        {"quant_bits", ch.quant_bits},
                        {"v_min", ch.v_min},
                        {"v_max", ch.v_max},
                        {"jitter_pct", ch.jitter_pct}};
}

}  // namespace spero::detail
