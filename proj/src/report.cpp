// SPDX-License-Identifier: Apache-2.0
#include "spero/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace spero {

namespace {

std::string fmt(double v, const char* spec = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string echo_comment(const std::string& config_echo) {
  if (config_echo.empty()) return "";
  std::ostringstream os;
  std::istringstream is(config_echo);
  std::string line;
  while (std::getline(is, line)) os << "# " << line << "\n";
  return os.str();
}

struct TableKey {
  std::string label;
  bool operator<(const TableKey& o) const { return label < o.label; }
};

std::string row_label(const AttackSpec& spec) {
  if (spec.kind == AttackKind::SecondOrder)
    return std::to_string(spec.pair_i) + "-" + std::to_string(spec.pair_j);
  return std::to_string(spec.subkey + 1);
}

struct MtdTable {
  std::vector<std::string> rows;             // labels, insertion order
  std::map<std::string, std::string> cells;  // "row|mode" -> text
  std::map<std::string, double> values;      // reached cells only
  bool second_order = false;
};

MtdTable build_table(const std::vector<MtdResult>& results) {
  MtdTable t;
  for (const auto& r : results) {
    std::string row = row_label(r.spec);
    if (std::find(t.rows.begin(), t.rows.end(), row) == t.rows.end())
      t.rows.push_back(row);
    t.second_order |= r.spec.kind == AttackKind::SecondOrder;
    std::string key = row + "|" + channel_mode_name(r.spec.mode);
    if (r.mtd) {
      t.cells[key] = std::to_string(*r.mtd);
      t.values[key] = static_cast<double>(*r.mtd);
    } else {
      t.cells[key] = "not reached";
    }
  }
  return t;
}

const char* kModes[3] = {"power", "em", "combined"};

std::string avg_cell(const MtdTable& t, const char* mode) {
  double sum = 0.0;
  size_t got = 0;
  for (const auto& row : t.rows) {
    auto it = t.values.find(row + "|" + mode);
    auto cell = t.cells.find(row + "|" + mode);
    if (cell == t.cells.end()) continue;  // column absent for this row
    if (it == t.values.end()) return "n/a";  // not reached somewhere
    sum += it->second;
    got++;
  }
  if (got == 0) return "";
  return fmt(sum / static_cast<double>(got), "%.1f");
}

}  // namespace

std::string hypothesis_csv(const HypothesisScore& score) {
  std::vector<uint32_t> rank_of(score.scores.size());
  for (uint32_t r = 0; r < score.ranking.size(); r++)
    rank_of[score.ranking[r]] = r;
  std::ostringstream os;
  os << "candidate,score,rank\n";
  for (size_t c = 0; c < score.scores.size(); c++)
    os << c << "," << fmt(score.scores[c]) << "," << rank_of[c] << "\n";
  return os.str();
}

std::string tvla_csv(const TvlaReport& rep, const std::string& config_echo) {
  std::ostringstream os;
  os << echo_comment(config_echo);
  os << "# n_fixed=" << rep.n_fixed << " n_random=" << rep.n_random
     << " threshold=" << fmt(rep.threshold)
     << " max_abs_t=" << fmt(rep.max_abs_t)
     << " verdict=" << (rep.pass ? "pass" : "fail") << "\n";
  os << "sample,t\n";
  for (size_t s = 0; s < rep.t.size(); s++)
    os << s << "," << fmt(rep.t[s]) << "\n";
  return os.str();
}

std::string mtd_table_csv(const std::vector<MtdResult>& results,
                          const std::string& config_echo) {
  MtdTable t = build_table(results);
  std::ostringstream os;
  os << echo_comment(config_echo);
  os << (t.second_order ? "pair" : "subkey") << ",power,em,combined\n";
  for (const auto& row : t.rows) {
    os << row;
    for (const char* mode : kModes) {
      auto it = t.cells.find(row + "|" + mode);
      os << "," << (it == t.cells.end() ? "" : it->second);
    }
    os << "\n";
  }
  if (!t.second_order && !t.rows.empty()) {
    os << "Avg.";
    for (const char* mode : kModes) os << "," << avg_cell(t, mode);
    os << "\n";
  }
  return os.str();
}

std::string mtd_table_markdown(const std::vector<MtdResult>& results,
                               const std::string& config_echo) {
  MtdTable t = build_table(results);
  std::ostringstream os;
  if (!config_echo.empty()) {
    std::istringstream is(config_echo);
    std::string line;
    while (std::getline(is, line)) os << "> " << line << "\n";
    os << "\n";
  }
  os << "| " << (t.second_order ? "Pair" : "Subkey")
     << " | Power | EM | Combined |\n";
  os << "| --- | --- | --- | --- |\n";
  for (const auto& row : t.rows) {
    os << "| " << row;
    for (const char* mode : kModes) {
      auto it = t.cells.find(row + "|" + mode);
      os << " | " << (it == t.cells.end() ? "" : it->second);
    }
    os << " |\n";
  }
  if (!t.second_order && !t.rows.empty()) {
    os << "| Avg.";
    for (const char* mode : kModes) os << " | " << avg_cell(t, mode);
    os << " |\n";
  }
  return os.str();
}

namespace {

// Minimal line-plot canvas shared by both SVG artifacts.
struct Plot {
  double width = 800, height = 400, margin = 60;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool log_x = false;
  std::ostringstream body;

  double tx(double x) const {
    double v = log_x ? std::log10(x) : x;
    double lo = log_x ? std::log10(x_lo) : x_lo;
    double hi = log_x ? std::log10(x_hi) : x_hi;
    if (hi <= lo) return margin;
    return margin + (v - lo) / (hi - lo) * (width - 2 * margin);
  }
  double ty(double y) const {
    if (y_hi <= y_lo) return height - margin;
    return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const char* color, const char* dash = nullptr) {
    if (pts.empty()) return;
    body << "<polyline fill=\"none\" stroke=\"" << color << "\"";
    if (dash) body << " stroke-dasharray=\"" << dash << "\"";
    body << " stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts)
      body << fmt(tx(x), "%.2f") << "," << fmt(ty(y), "%.2f") << " ";
    body << "\"/>\n";
  }

  void text(double x, double y, const std::string& s,
            const char* anchor = "start", const char* color = "#333") {
    body << "<text x=\"" << fmt(x, "%.2f") << "\" y=\"" << fmt(y, "%.2f")
         << "\" font-size=\"12\" font-family=\"monospace\" text-anchor=\""
         << anchor << "\" fill=\"" << color << "\">" << s << "</text>\n";
  }

  std::string render(const std::string& title) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
       << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    os << "<line x1=\"" << margin << "\" y1=\"" << height - margin
       << "\" x2=\"" << width - margin << "\" y2=\"" << height - margin
       << "\" stroke=\"#333\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\""
       << margin << "\" y2=\"" << height - margin << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"20\" font-size=\"14\" "
          "font-family=\"monospace\" text-anchor=\"middle\">"
       << title << "</text>\n";
    os << body.str();
    os << "</svg>\n";
    return os.str();
  }
};

}  // namespace

std::string tvla_svg(const TvlaReport& rep, const std::string& title) {
  Plot p;
  p.x_lo = 0;
  p.x_hi = rep.t.empty() ? 1 : static_cast<double>(rep.t.size() - 1);
  double ymax = rep.threshold * 1.2;
  for (double v : rep.t) ymax = std::max(ymax, std::fabs(v) * 1.1);
  p.y_lo = -ymax;
  p.y_hi = ymax;

  std::vector<std::pair<double, double>> pts;
  pts.reserve(rep.t.size());
  for (size_t s = 0; s < rep.t.size(); s++)
    pts.push_back({static_cast<double>(s), rep.t[s]});
  p.polyline(pts, "#1f77b4");
  for (double rail : {rep.threshold, -rep.threshold})
    p.polyline({{p.x_lo, rail}, {p.x_hi, rail}}, "#d62728", "6,4");
  p.text(p.margin, p.ty(rep.threshold) - 4,
         "+/-" + fmt(rep.threshold, "%.1f"));
  p.text(p.width - p.margin, p.height - p.margin + 16, "sample", "end");
  p.text(p.margin, p.margin - 8, "t");
  p.text(p.width - p.margin, p.margin,
         "max|t|=" + fmt(rep.max_abs_t, "%.3f") +
             (rep.pass ? " (pass)" : " (fail)"),
         "end");
  return p.render(title);
}

std::string success_curves_svg(const std::vector<MtdResult>& results,
                               const std::string& title) {
  Plot p;
  p.log_x = true;
  p.x_lo = 1e18;
  p.x_hi = 1;
  for (const auto& r : results) {
    for (uint64_t n : r.grid) {
      p.x_lo = std::min(p.x_lo, static_cast<double>(n));
      p.x_hi = std::max(p.x_hi, static_cast<double>(n));
    }
  }
  if (p.x_lo >= p.x_hi) {
    p.x_lo = 1;
    p.x_hi = 10;
  }
  p.y_lo = 0;
  p.y_hi = 1.05;

  const char* colors[6] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                           "#d62728", "#9467bd", "#8c564b"};
  for (size_t i = 0; i < results.size(); i++) {
    const auto& r = results[i];
    std::vector<std::pair<double, double>> pts;
    for (size_t gi = 0; gi < r.grid.size(); gi++) {
      if (std::isnan(r.rates[gi])) continue;
      pts.push_back({static_cast<double>(r.grid[gi]), r.rates[gi]});
    }
    const char* color = colors[i % 6];
    p.polyline(pts, color);
    p.text(p.width - p.margin, p.margin + 14 * static_cast<double>(i + 1),
           r.spec.describe(), "end", color);
  }
  p.text(p.width - p.margin, p.height - p.margin + 16, "traces (log)", "end");
  p.text(p.margin, p.margin - 8, "success rate");
  return p.render(title);
}

std::string antenna_sweep_csv(const std::vector<AntennaSweepRow>& rows) {
  std::ostringstream os;
  os << "turns,r_r,r_l,e_cd,gain,a_e,p_r,v_inst\n";
  for (const auto& r : rows) {
    os << r.turns << "," << fmt(r.r_r, "%.12g") << "," << fmt(r.r_l, "%.12g")
       << "," << fmt(r.e_cd, "%.12g") << "," << fmt(r.gain, "%.12g") << ","
       << fmt(r.a_e, "%.12g") << "," << fmt(r.p_r, "%.12g") << ","
       << fmt(r.v_inst, "%.12g") << "\n";
  }
  return os.str();
}

std::string validation_report_text(const ValidationReport& rep) {
  std::ostringstream os;
  for (const auto& c : rep.checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << "\n";
  }
  os << (rep.ok() ? "dataset OK" : "dataset INVALID") << "\n";
  return os.str();
}

}  // namespace spero
