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
//
// Shallow comparison models. Authors are partitioned into cells S_ij by
// cumulative count i at grid year t_{j-1}; the mean productivity of each
// cell drives two regressions:
//   piecewise: log(m_ij/n_ij) = alpha_i + beta_i * (t_j - t_1)  per level,
//   log-log:   log(m_ij/n_ij) = mu_j + upsilon_j * log(i)       per column.
// The combined model stitches both over a four-part grid and averages the
// two extrapolation routes in the outer block.

#ifndef PUBCAST_BASELINES_HPP_
#define PUBCAST_BASELINES_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pubcast/corpus.hpp"

namespace pubcast {

// Ordinary least squares of y on x; exact on noiseless collinear data.
// Requires >= 2 points with distinct x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};
LinearFit linear_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct PartitionTable {
  std::vector<int> grid;  // t_0..t_J, strictly increasing (J+1 entries)
  int cap = 40;           // I: highest level with its own row
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> n;  // I x J
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m;
  std::vector<std::int64_t> zero_n, zero_m;          // level-0 authors, per column
  std::vector<std::int64_t> overflow_n, overflow_m;  // level > I, per column

  int columns() const { return static_cast<int>(grid.size()) - 1; }
  int t1() const { return grid[1]; }
};

// Cell membership is the cumulative count at t_{j-1}; m_ij sums those
// authors' publications in (t_{j-1}, t_j]. The truth series must cover
// the whole grid.
PartitionTable build_partition(const SeriesMap& series,
                               const std::vector<std::string>& cohort,
                               const std::vector<int>& grid, int cap);

struct LevelFit {
  bool fit = false;
  double alpha = 0.0;
  double beta = 0.0;
};
struct ColumnFit {
  bool fit = false;
  double mu = 0.0;
  double upsilon = 0.0;
};

struct PiecewiseFit {
  std::vector<int> grid;
  int fit_window = 0;                // L: columns used in the regression
  std::vector<LevelFit> levels;      // index i-1
  std::size_t dropped_empty_cells = 0;  // m == 0, excluded from the logs
  std::size_t unfit_levels = 0;

  // e^(alpha_i + beta_i * (year - t_1)); empty if the level is unfit.
  std::optional<double> lambda(int level, int year) const;
};

// Per-level regression over columns j = 1..L; cells with n = 0 or m = 0
// are excluded, and levels with fewer than two usable cells are marked
// unfit.
PiecewiseFit fit_piecewise(const PartitionTable& table, int fit_window);

// lambda_ij for 1-based column j. Throws std::invalid_argument on an
// unfit level.
double predict_piecewise(const PiecewiseFit& fit, int level, int column);

// Cross-sectional regression at column j over levels 1..cap.
ColumnFit fit_loglog(const PartitionTable& table, int column, int cap);

struct CombinedFit {
  std::vector<int> grid;
  int cap = 180;      // I
  int test_cap = 60;  // I1: authors above this are not forecast
  int k_split = 42;   // K
  int fit_window = 14;  // L
  std::vector<LevelFit> levels;    // data fits for i <= K, route A above
  std::vector<ColumnFit> columns;  // data fits for j <= L, route B beyond
  Eigen::MatrixXd lambda_grid;     // I x J resolved rates (NaN where unfit)

  std::optional<double> lambda(int level, int year) const;
};

// Parts I/II from the piecewise fits (i <= K), Part III from the log-log
// fits (j <= L); Part IV averages route A (piecewise regression through
// Part III rates) and route B (log-log regression through Part II rates).
CombinedFit fit_combined(const PartitionTable& table, int cap, int k_split,
                         int fit_window);

struct BaselineForecast {
  std::string author_id;
  int t_x = 0;
  std::vector<double> trajectory;  // predicted cumulative counts
  std::vector<double> p_publish;   // 1 - exp(-lambda), Poisson zero class
};

struct BaselineStats {
  std::size_t excluded_cap = 0;    // starting level 0 or above test_cap
  std::size_t excluded_unfit = 0;  // ran onto a level without a usable fit
};

using LambdaFn = std::function<std::optional<double>(int level, int year)>;

// Iterates level <- level + round(lambda) for each year of [t_x, t_y].
// Authors whose starting level is 0 or above `test_cap`, or whose
// trajectory reaches a level without a fit, are dropped and counted.
std::vector<BaselineForecast> baseline_forecast(
    const SeriesMap& series, const std::vector<std::string>& cohort, int t_x,
    int t_y, int test_cap, const LambdaFn& lambda, BaselineStats* stats = nullptr);

// Dumps: fits as (i, alpha_i, beta_i) / (j, mu_j, upsilon_j); the
// partition as (i, j, n_ij, m_ij).
void write_level_fits_csv(std::ostream& out, const std::vector<LevelFit>& levels);
void write_column_fits_csv(std::ostream& out, const std::vector<ColumnFit>& columns);
void write_partition_csv(std::ostream& out, const PartitionTable& table);

}  // namespace pubcast

#endif  // PUBCAST_BASELINES_HPP_
