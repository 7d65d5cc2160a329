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

#ifndef PUBCAST_EVALUATION_HPP_
#define PUBCAST_EVALUATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pubcast/corpus.hpp"
#include "pubcast/forecast.hpp"

namespace pubcast {

// Sample Pearson correlation; empty when either argument has zero
// variance (undefined, deliberately not reported as 0).
std::optional<double> pearson(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys);

// s1: correlation on author-aligned lists (individual level).
// s2: correlation on independently ascending-sorted lists (group level).
std::pair<std::optional<double>, std::optional<double>> s1_s2(
    const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted);

struct KsResult {
  double statistic = 0.0;  // sup distance of the two empirical CDFs
  double p_value = 1.0;    // asymptotic Kolmogorov distribution
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
// effective size n_a*n_b/(n_a+n_b). Throws on an empty sample.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Survival function of the Kolmogorov distribution, Q(lambda) =
// 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2), evaluated through the dual
// theta series for small lambda where the alternating form loses all
// precision.
double kolmogorov_p(double lambda);

// Tie-aware thresholded accuracy over publication events:
//   m1 = #{published and p > 0.5}, m2 = #{not published and p < 0.5},
//   m3 = #{p == 0.5}, value = (m1 + m2 + 0.5*m3) / m.
// Probabilities are rounded to 6 decimals first so the m3 class is
// reproducible. Not the ROC area; emitted as `auc_paper` in reports.
struct AucCounts {
  std::size_t m1 = 0, m2 = 0, m3 = 0, m = 0;
  double value = 0.0;
};
AucCounts auc_paper(const std::vector<bool>& published, const std::vector<double>& probs);

// ---------------------------------------------------------------------------
// Report assembly over a cohort forecast

// Predicted and true trajectories of one author, as the reports consume
// them; `level` is the author's true cumulative count at the reference
// year t_x - 1.
struct EvalSeries {
  std::string author_id;
  std::int64_t level = 0;
  std::vector<double> truth;      // indexed year - t_x; NaN where unknown
  std::vector<double> predicted;  // realization trajectory
  std::vector<double> p_publish;
};

// Regroups forecast rows against the truth cache. Authors above
// `level_cap` (or below 1) at the reference year are dropped.
std::vector<EvalSeries> collect_eval_series(const std::vector<ForecastRow>& rows,
                                            const SeriesMap& truth, int t_x,
                                            int t_y, int level_cap);

struct TrendCell {
  double true_mean = 0.0;
  double predicted_mean = 0.0;
  std::size_t authors = 0;
};

struct TrendReport {
  int t_x = 0;
  int level_cap = 15;
  // cells[(i, y)] for levels with at least one author
  std::map<std::pair<int, int>, TrendCell> cells;
  // pooled per-year correlations over all tested authors
  std::map<int, std::pair<std::optional<double>, std::optional<double>>> pooled;
  // per-level, per-year correlations
  std::map<std::pair<int, int>, std::pair<std::optional<double>, std::optional<double>>>
      by_level;
};

TrendReport trend_report(const std::vector<EvalSeries>& series, int t_x, int t_y,
                         int level_cap);

struct DistributionReport {
  int year = 0;
  KsResult ks;
  // count -> (true frequency, predicted frequency); predictions rounded
  // half-up to integers at report level
  std::map<std::int64_t, std::pair<double, double>> histogram;
};

DistributionReport distribution_report(const std::vector<EvalSeries>& series,
                                       int t_x, int year);

struct AucCell {
  int level = 0;
  int year = 0;
  AucCounts counts;
};

enum class AucGrouping { kTrueLevel, kPredictedLevel };

// Per-(level, year) AUC of the published/not-published events against
// the forecast probabilities. Grouping by predicted level uses the
// rounded realization trajectory at year - 1 (the true level for the
// first horizon year).
std::vector<AucCell> auc_report(const std::vector<EvalSeries>& series, int t_x,
                                int t_y, int level_cap, AucGrouping grouping);

// Plot-ready CSVs: trend (i, y, n, m, s1, s2), per-year distribution
// (count, true_freq, pred_freq, D, p), AUC (i, y, m1, m2, m3, m, auc).
void write_trend_csv(std::ostream& out, const TrendReport& report);
void write_trend_levels_csv(std::ostream& out, const TrendReport& report);
void write_distribution_csv(std::ostream& out, const DistributionReport& report);
void write_auc_csv(std::ostream& out, const std::vector<AucCell>& cells);

}  // namespace pubcast

#endif  // PUBCAST_EVALUATION_HPP_
