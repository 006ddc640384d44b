// SPDX-License-Identifier: Apache-2.0
#include "spero/poi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace spero {

std::vector<double> snr(const TraceMatrix& traces,
                        const std::vector<int>& labels) {
  if (labels.size() != traces.n)
    throw LengthMismatch("label count does not match trace count");
  std::map<int, std::vector<size_t>> groups;
  for (size_t t = 0; t < labels.size(); t++) groups[labels[t]].push_back(t);
  for (auto it = groups.begin(); it != groups.end();) {
    if (it->second.size() < 2)
      it = groups.erase(it);
    else
      ++it;
  }
  if (groups.size() < 2)
    throw InsufficientClassData("need >= 2 labels with >= 2 traces each");

  const size_t w = traces.width;
  const double n_classes = static_cast<double>(groups.size());
  std::vector<double> mean_of_means(w, 0.0), means_sq(w, 0.0);
  std::vector<double> noise(w, 0.0);
  std::vector<double> cmean(w), cm2(w);
  for (const auto& [label, rows] : groups) {
    std::fill(cmean.begin(), cmean.end(), 0.0);
    std::fill(cm2.begin(), cm2.end(), 0.0);
    double cnt = 0.0;
    for (size_t r : rows) {
      cnt += 1.0;
      const double* row = traces.row(r);
      for (size_t s = 0; s < w; s++) {
        double d = row[s] - cmean[s];
        cmean[s] += d / cnt;
        cm2[s] += d * (row[s] - cmean[s]);
      }
    }
    for (size_t s = 0; s < w; s++) {
      mean_of_means[s] += cmean[s];
      means_sq[s] += cmean[s] * cmean[s];
      noise[s] += cm2[s] / (cnt - 1.0);
    }
  }
  std::vector<double> out(w);
  for (size_t s = 0; s < w; s++) {
    double mm = mean_of_means[s] / n_classes;
    double signal = means_sq[s] / n_classes - mm * mm;
    double denom = noise[s] / n_classes;
    out[s] = denom > 0.0 ? signal / denom
                         : std::numeric_limits<double>::infinity();
  }
  return out;
}

namespace {

std::vector<int> discretize(const std::vector<double>& x, int bins) {
  double lo = x[0], hi = x[0];
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<int> out(x.size());
  if (hi <= lo) return out;  // constant input: one occupied bin
  double width = (hi - lo) / bins;
  for (size_t i = 0; i < x.size(); i++) {
    int b = static_cast<int>((x[i] - lo) / width);
    out[i] = std::min(b, bins - 1);
  }
  return out;
}

double mi_binned(const std::vector<int>& bx, const std::vector<int>& by,
                 int bins) {
  const size_t n = bx.size();
  std::vector<double> joint(static_cast<size_t>(bins) * bins, 0.0);
  std::vector<double> px(bins, 0.0), py(bins, 0.0);
  for (size_t i = 0; i < n; i++) {
    joint[bx[i] * bins + by[i]] += 1.0;
    px[bx[i]] += 1.0;
    py[by[i]] += 1.0;
  }
  const double dn = static_cast<double>(n);
  double mi = 0.0;
  for (int a = 0; a < bins; a++) {
    for (int b = 0; b < bins; b++) {
      double pj = joint[a * bins + b];
      if (pj <= 0.0) continue;
      mi += (pj / dn) * std::log(pj * dn / (px[a] * py[b]));
    }
  }
  return mi < 0.0 ? 0.0 : mi;
}

}  // namespace

double mutual_information(const std::vector<double>& x,
                          const std::vector<double>& y, int bins) {
  if (x.size() != y.size())
    throw LengthMismatch("mutual_information inputs differ in length");
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (x.size() < static_cast<size_t>(bins))
    throw LengthMismatch("need at least `bins` samples");
  return mi_binned(discretize(x, bins), discretize(y, bins), bins);
}

double entropy(const std::vector<double>& x, int bins) {
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (x.empty()) return 0.0;
  auto bx = discretize(x, bins);
  std::vector<double> p(bins, 0.0);
  for (int b : bx) p[b] += 1.0;
  const double dn = static_cast<double>(x.size());
  double h = 0.0;
  for (double c : p)
    if (c > 0.0) h -= (c / dn) * std::log(c / dn);
  return h;
}

FeatureRanking mrmr_select(const TraceMatrix& features,
                           const std::vector<double>& labels, int k,
                           int bins) {
  if (labels.size() != features.n)
    throw LengthMismatch("label count does not match row count");
  if (k < 1 || static_cast<size_t>(k) > features.width)
    throw ConfigError("k must lie in 1..feature count");

  const size_t w = features.width, n = features.n;
  std::vector<std::vector<int>> cols(w);
  std::vector<double> buf(n);
  for (size_t f = 0; f < w; f++) {
    for (size_t t = 0; t < n; t++) buf[t] = features.row(t)[f];
    cols[f] = discretize(buf, bins);
  }
  std::vector<int> lab = discretize(labels, bins);

  std::vector<double> relevance(w);
  for (size_t f = 0; f < w; f++) relevance[f] = mi_binned(cols[f], lab, bins);

  FeatureRanking out;
  std::vector<bool> taken(w, false);
  std::vector<double> red_sum(w, 0.0);
  for (int pick = 0; pick < k; pick++) {
    double best = -std::numeric_limits<double>::infinity();
    size_t best_f = w;
    for (size_t f = 0; f < w; f++) {
      if (taken[f]) continue;
      double score = relevance[f];
      if (pick > 0) score -= red_sum[f] / pick;
      if (score > best) {
        best = score;
        best_f = f;
      }
    }
    taken[best_f] = true;
    out.entries.push_back(
        {static_cast<uint32_t>(best_f), relevance[best_f], best});
    for (size_t f = 0; f < w; f++) {
      if (!taken[f]) red_sum[f] += mi_binned(cols[f], cols[best_f], bins);
    }
  }
  return out;
}

std::string feature_ranking_csv(const FeatureRanking& r) {
  std::ostringstream os;
  os << "rank,sample_index,relevance,adjusted\n";
  for (size_t i = 0; i < r.entries.size(); i++) {
    const auto& e = r.entries[i];
    os << i << "," << e.sample_index << "," << e.relevance << ","
       << e.adjusted << "\n";
  }
  return os.str();
}

}  // namespace spero
