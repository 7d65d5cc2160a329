// Copyright 2026 The Pubcast Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pubcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace pubcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double round6(double p) { return std::round(p * 1e6) / 1e6; }

std::int64_t round_half_up(double x) { return std::llround(x); }

void write_opt(std::ostream& out, const std::optional<double>& v) {
  if (v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    out << buf;
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::optional<double> pearson(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("pearson needs two equal-length samples, n >= 2");
  }
  const Eigen::ArrayXd dx = xs.array() - xs.mean();
  const Eigen::ArrayXd dy = ys.array() - ys.mean();
  const double sxx = (dx * dx).sum();
  const double syy = (dy * dy).sum();
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return (dx * dy).sum() / std::sqrt(sxx * syy);
}

std::pair<std::optional<double>, std::optional<double>> s1_s2(
    const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted) {
  const std::optional<double> s1 = pearson(truth, predicted);
  Eigen::VectorXd a = truth;
  Eigen::VectorXd b = predicted;
  std::sort(a.data(), a.data() + a.size());
  std::sort(b.data(), b.data() + b.size());
  return {s1, pearson(a, b)};
}

double kolmogorov_p(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // K(lambda) via the theta-function form; 3 terms are exact to double
    // precision in this range.
    const double f = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    const double k = std::sqrt(2.0 * std::numbers::pi) / lambda *
                     (std::exp(-f) + std::exp(-9.0 * f) + std::exp(-25.0 * f));
    return std::clamp(1.0 - k, 0.0, 1.0);
  }
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * p, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("KS test needs two non-empty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na -
                              static_cast<double>(ib) / nb));
  }
  KsResult result;
  result.statistic = d;
  result.n_a = a.size();
  result.n_b = b.size();
  const double ne = na * nb / (na + nb);
  result.p_value = kolmogorov_p(std::sqrt(ne) * d);
  return result;
}

AucCounts auc_paper(const std::vector<bool>& published,
                    const std::vector<double>& probs) {
  if (published.size() != probs.size() || probs.empty()) {
    throw std::invalid_argument("auc needs equal-length non-empty inputs");
  }
  AucCounts counts;
  counts.m = probs.size();
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = round6(probs[k]);
    if (p == 0.5) {
      ++counts.m3;
    } else if (published[k] && p > 0.5) {
      ++counts.m1;
    } else if (!published[k] && p < 0.5) {
      ++counts.m2;
    }
  }
  counts.value = (static_cast<double>(counts.m1) + static_cast<double>(counts.m2) +
                  0.5 * static_cast<double>(counts.m3)) /
                 static_cast<double>(counts.m);
  return counts;
}

std::vector<EvalSeries> collect_eval_series(const std::vector<ForecastRow>& rows,
                                            const SeriesMap& truth, int t_x,
                                            int t_y, int level_cap) {
  std::map<std::string, EvalSeries> by_author;
  const std::size_t horizon = static_cast<std::size_t>(t_y - t_x + 1);
  for (const ForecastRow& row : rows) {
    if (row.year < t_x || row.year > t_y) continue;
    auto [it, inserted] = by_author.try_emplace(row.author_id);
    EvalSeries& s = it->second;
    if (inserted) {
      s.author_id = row.author_id;
      s.truth.assign(horizon, kNaN);
      s.predicted.assign(horizon, kNaN);
      s.p_publish.assign(horizon, kNaN);
      const auto ts = truth.find(row.author_id);
      if (ts == truth.end()) {
        throw InputError("forecast author missing from truth cache: " +
                         row.author_id);
      }
      s.level = t_x - 1 < ts->second.base_year ? 0 : ts->second.at(t_x - 1);
    }
    const std::size_t k = static_cast<std::size_t>(row.year - t_x);
    s.predicted[k] = row.realization;
    s.p_publish[k] = row.p_publish;
    const auto ts = truth.find(row.author_id);
    if (row.year <= ts->second.last_year()) {
      s.truth[k] = static_cast<double>(ts->second.at(row.year));
    }
  }
  std::vector<EvalSeries> out;
  out.reserve(by_author.size());
  for (auto& [author, s] : by_author) {
    if (s.level < 1 || s.level > level_cap) continue;
    out.push_back(std::move(s));
  }
  return out;
}

TrendReport trend_report(const std::vector<EvalSeries>& series, int t_x, int t_y,
                         int level_cap) {
  TrendReport report;
  report.t_x = t_x;
  report.level_cap = level_cap;
  for (int year = t_x; year <= t_y; ++year) {
    const std::size_t k = static_cast<std::size_t>(year - t_x);
    std::vector<double> pooled_true, pooled_pred;
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const EvalSeries& s : series) {
      const int level = static_cast<int>(s.level);
      auto& [g_true, g_pred] = groups[level];
      g_pred.push_back(s.predicted[k]);
      if (!std::isnan(s.truth[k])) {
        g_true.push_back(s.truth[k]);
        pooled_true.push_back(s.truth[k]);
        pooled_pred.push_back(s.predicted[k]);
      }
    }
    for (auto& [level, lists] : groups) {
      auto& [g_true, g_pred] = lists;
      TrendCell cell;
      cell.authors = g_pred.size();
      cell.predicted_mean = to_vector(g_pred).mean();
      cell.true_mean = g_true.empty() ? kNaN : to_vector(g_true).mean();
      report.cells[{level, year}] = cell;
      if (g_true.size() >= 2 && g_true.size() == g_pred.size()) {
        report.by_level[{level, year}] = s1_s2(to_vector(g_true), to_vector(g_pred));
      }
    }
    if (pooled_true.size() >= 2) {
      report.pooled[year] = s1_s2(to_vector(pooled_true), to_vector(pooled_pred));
    }
  }
  return report;
}

DistributionReport distribution_report(const std::vector<EvalSeries>& series,
                                       int t_x, int year) {
  DistributionReport report;
  report.year = year;
  const std::size_t k = static_cast<std::size_t>(year - t_x);
  std::vector<double> truth, predicted;
  for (const EvalSeries& s : series) {
    if (k >= s.truth.size() || std::isnan(s.truth[k])) continue;
    truth.push_back(s.truth[k]);
    predicted.push_back(static_cast<double>(round_half_up(s.predicted[k])));
  }
  if (truth.empty()) {
    throw InputError("no ground truth for year " + std::to_string(year));
  }
  report.ks = ks_two_sample(truth, predicted);
  const double total = static_cast<double>(truth.size());
  for (double v : truth) report.histogram[static_cast<std::int64_t>(v)].first += 1.0;
  for (double v : predicted) {
    report.histogram[static_cast<std::int64_t>(v)].second += 1.0;
  }
  for (auto& [count, freqs] : report.histogram) {
    freqs.first /= total;
    freqs.second /= total;
  }
  return report;
}

std::vector<AucCell> auc_report(const std::vector<EvalSeries>& series, int t_x,
                                int t_y, int level_cap, AucGrouping grouping) {
  std::map<std::pair<int, int>, std::pair<std::vector<bool>, std::vector<double>>>
      groups;
  for (const EvalSeries& s : series) {
    for (int year = t_x; year <= t_y; ++year) {
      const std::size_t k = static_cast<std::size_t>(year - t_x);
      const double h_prev = year == t_x ? static_cast<double>(s.level)
                                        : s.truth[k - 1];
      if (std::isnan(h_prev) || k >= s.truth.size() || std::isnan(s.truth[k])) {
        continue;
      }
      int level;
      if (grouping == AucGrouping::kTrueLevel || year == t_x) {
        level = static_cast<int>(h_prev);
      } else {
        level = static_cast<int>(round_half_up(s.predicted[k - 1]));
      }
      if (level < 1 || level > level_cap) continue;
      auto& [outcomes, probs] = groups[{level, year}];
      outcomes.push_back(s.truth[k] - h_prev >= 1.0);
      probs.push_back(s.p_publish[k]);
    }
  }
  std::vector<AucCell> cells;
  cells.reserve(groups.size());
  for (auto& [key, lists] : groups) {
    AucCell cell;
    cell.level = key.first;
    cell.year = key.second;
    cell.counts = auc_paper(lists.first, lists.second);
    cells.push_back(cell);
  }
  return cells;
}

void write_trend_csv(std::ostream& out, const TrendReport& report) {
  out << "i,y,n,m,s1,s2\n";
  char buf[32];
  for (const auto& [key, cell] : report.cells) {
    out << key.first << ',' << key.second << ',';
    if (!std::isnan(cell.true_mean)) {
      std::snprintf(buf, sizeof buf, "%.6f", cell.true_mean);
      out << buf;
    }
    out << ',';
    std::snprintf(buf, sizeof buf, "%.6f", cell.predicted_mean);
    out << buf << ',';
    const auto pooled = report.pooled.find(key.second);
    if (pooled != report.pooled.end()) {
      write_opt(out, pooled->second.first);
      out << ',';
      write_opt(out, pooled->second.second);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void write_trend_levels_csv(std::ostream& out, const TrendReport& report) {
  out << "i,y,s1,s2\n";
  for (const auto& [key, corr] : report.by_level) {
    out << key.first << ',' << key.second << ',';
    write_opt(out, corr.first);
    out << ',';
    write_opt(out, corr.second);
    out << '\n';
  }
}

void write_distribution_csv(std::ostream& out, const DistributionReport& report) {
  out << "count,true_freq,pred_freq,D,p\n";
  char buf[96];
  for (const auto& [count, freqs] : report.histogram) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f,%.6f,%.6f,%.6f",
                  static_cast<long long>(count), freqs.first, freqs.second,
                  report.ks.statistic, report.ks.p_value);
    out << buf << '\n';
  }
}

void write_auc_csv(std::ostream& out, const std::vector<AucCell>& cells) {
  out << "i,y,m1,m2,m3,m,auc_paper\n";
  char buf[32];
  for (const AucCell& cell : cells) {
    out << cell.level << ',' << cell.year << ',' << cell.counts.m1 << ','
        << cell.counts.m2 << ',' << cell.counts.m3 << ',' << cell.counts.m << ',';
    std::snprintf(buf, sizeof buf, "%.6f", cell.counts.value);
    out << buf << '\n';
  }
}

}  // namespace pubcast
