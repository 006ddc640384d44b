// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "spero/antenna.hpp"
#include "spero/attack.hpp"
#include "spero/dataset.hpp"
#include "spero/eval.hpp"
#include "spero/tvla.hpp"

namespace spero {

// candidate,score,rank rows for all candidates (256 or 65536).
std::string hypothesis_csv(const HypothesisScore& score);

// Per-sample t values; `config_echo` lines are embedded as leading comments
// so every artifact names the run that produced it.
std::string tvla_csv(const TvlaReport& rep, const std::string& config_echo);

// t-statistic trace with dashed +/-threshold rails.
std::string tvla_svg(const TvlaReport& rep, const std::string& title);

// MTD tables: one row per subkey (1-16, plus trailing "Avg.") or per byte
// pair, columns Power/EM/Combined.  Cells show the measurements-to-
// disclosure count or "not reached".
std::string mtd_table_csv(const std::vector<MtdResult>& results,
                          const std::string& config_echo);
std::string mtd_table_markdown(const std::vector<MtdResult>& results,
                               const std::string& config_echo);

// Success-rate-vs-traces curves, one polyline per result, log-scaled x.
std::string success_curves_svg(const std::vector<MtdResult>& results,
                               const std::string& title);

std::string antenna_sweep_csv(const std::vector<AntennaSweepRow>& rows);

std::string validation_report_text(const ValidationReport& rep);

}  // namespace spero
