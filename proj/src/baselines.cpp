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

#include "pubcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pubcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t level_at(const AuthorSeries& s, int year) {
  return year < s.base_year ? 0 : s.at(year);
}

// Collects (x, y) pairs of usable cells and runs OLS; returns false when
// fewer than two cells survive.
class CellRegression {
 public:
  void add(double x, double y) {
    xs_.push_back(x);
    ys_.push_back(y);
  }
  std::size_t size() const { return xs_.size(); }
  bool solve(double& intercept, double& slope) const {
    if (xs_.size() < 2) return false;
    const Eigen::Map<const Eigen::VectorXd> x(xs_.data(),
                                              static_cast<Eigen::Index>(xs_.size()));
    const Eigen::Map<const Eigen::VectorXd> y(ys_.data(),
                                              static_cast<Eigen::Index>(ys_.size()));
    const LinearFit fit = linear_fit(x, y);
    intercept = fit.intercept;
    slope = fit.slope;
    return true;
  }

 private:
  std::vector<double> xs_, ys_;
};

}  // namespace

LinearFit linear_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit needs >= 2 paired points");
  }
  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const Eigen::ArrayXd dx = x.array() - x_mean;
  const double sxx = (dx * dx).sum();
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: x has zero variance");
  LinearFit fit;
  fit.slope = (dx * (y.array() - y_mean)).sum() / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  return fit;
}

PartitionTable build_partition(const SeriesMap& series,
                               const std::vector<std::string>& cohort,
                               const std::vector<int>& grid, int cap) {
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw std::invalid_argument("partition grid must be strictly increasing");
  }
  if (cap < 1) throw std::invalid_argument("partition cap must be >= 1");

  PartitionTable table;
  table.grid = grid;
  table.cap = cap;
  const int J = table.columns();
  table.n.setZero(cap, J);
  table.m.setZero(cap, J);
  table.zero_n.assign(static_cast<std::size_t>(J), 0);
  table.zero_m.assign(static_cast<std::size_t>(J), 0);
  table.overflow_n.assign(static_cast<std::size_t>(J), 0);
  table.overflow_m.assign(static_cast<std::size_t>(J), 0);

  for (const std::string& author : cohort) {
    const AuthorSeries& s = series.at(author);
    for (int j = 1; j <= J; ++j) {
      const std::int64_t level = level_at(s, grid[static_cast<std::size_t>(j - 1)]);
      const std::int64_t pubs =
          level_at(s, grid[static_cast<std::size_t>(j)]) - level;
      if (level == 0) {
        ++table.zero_n[static_cast<std::size_t>(j - 1)];
        table.zero_m[static_cast<std::size_t>(j - 1)] += pubs;
      } else if (level <= cap) {
        ++table.n(level - 1, j - 1);
        table.m(level - 1, j - 1) += pubs;
      } else {
        ++table.overflow_n[static_cast<std::size_t>(j - 1)];
        table.overflow_m[static_cast<std::size_t>(j - 1)] += pubs;
      }
    }
  }
  return table;
}

std::optional<double> PiecewiseFit::lambda(int level, int year) const {
  if (level < 1 || level > static_cast<int>(levels.size()) ||
      !levels[static_cast<std::size_t>(level - 1)].fit) {
    return std::nullopt;
  }
  const LevelFit& f = levels[static_cast<std::size_t>(level - 1)];
  return std::exp(f.alpha + f.beta * static_cast<double>(year - grid[1]));
}

PiecewiseFit fit_piecewise(const PartitionTable& table, int fit_window) {
  if (fit_window < 2 || fit_window > table.columns()) {
    throw std::invalid_argument("fit window L must satisfy 2 <= L <= J");
  }
  PiecewiseFit fit;
  fit.grid = table.grid;
  fit.fit_window = fit_window;
  fit.levels.resize(static_cast<std::size_t>(table.cap));
  for (int i = 1; i <= table.cap; ++i) {
    CellRegression reg;
    for (int j = 1; j <= fit_window; ++j) {
      const std::int64_t n = table.n(i - 1, j - 1);
      const std::int64_t m = table.m(i - 1, j - 1);
      if (n == 0) continue;
      if (m == 0) {
        ++fit.dropped_empty_cells;
        continue;
      }
      reg.add(static_cast<double>(table.grid[static_cast<std::size_t>(j)] - table.t1()),
              std::log(static_cast<double>(m) / static_cast<double>(n)));
    }
    LevelFit& level = fit.levels[static_cast<std::size_t>(i - 1)];
    level.fit = reg.solve(level.alpha, level.beta);
    if (!level.fit) ++fit.unfit_levels;
  }
  return fit;
}

double predict_piecewise(const PiecewiseFit& fit, int level, int column) {
  if (column < 1 || column >= static_cast<int>(fit.grid.size())) {
    throw std::invalid_argument("column out of grid");
  }
  const std::optional<double> lambda =
      fit.lambda(level, fit.grid[static_cast<std::size_t>(column)]);
  if (!lambda) {
    throw std::invalid_argument("level " + std::to_string(level) + " is unfit");
  }
  return *lambda;
}

ColumnFit fit_loglog(const PartitionTable& table, int column, int cap) {
  if (column < 1 || column > table.columns()) {
    throw std::invalid_argument("column out of grid");
  }
  const int top = std::min(cap, table.cap);
  CellRegression reg;
  for (int i = 1; i <= top; ++i) {
    const std::int64_t n = table.n(i - 1, column - 1);
    const std::int64_t m = table.m(i - 1, column - 1);
    if (n == 0 || m == 0) continue;
    reg.add(std::log(static_cast<double>(i)),
            std::log(static_cast<double>(m) / static_cast<double>(n)));
  }
  ColumnFit fit;
  fit.fit = reg.solve(fit.mu, fit.upsilon);
  return fit;
}

std::optional<double> CombinedFit::lambda(int level, int year) const {
  if (level < 1 || level > cap) return std::nullopt;
  const auto it = std::find(grid.begin() + 1, grid.end(), year);
  if (it == grid.end()) return std::nullopt;
  const Eigen::Index j = std::distance(grid.begin(), it);  // 1-based column
  const double value = lambda_grid(level - 1, j - 1);
  if (std::isnan(value)) return std::nullopt;
  return value;
}

CombinedFit fit_combined(const PartitionTable& table, int cap, int k_split,
                         int fit_window) {
  if (cap > table.cap) {
    throw std::invalid_argument("combined cap exceeds partition cap");
  }
  if (k_split < 1 || k_split > cap) {
    throw std::invalid_argument("K must satisfy 1 <= K <= I");
  }
  const int J = table.columns();
  if (fit_window < 2 || fit_window > J) {
    throw std::invalid_argument("fit window L must satisfy 2 <= L <= J");
  }

  CombinedFit out;
  out.grid = table.grid;
  out.cap = cap;
  out.k_split = k_split;
  out.fit_window = fit_window;
  out.levels.resize(static_cast<std::size_t>(cap));
  out.columns.resize(static_cast<std::size_t>(J));
  out.lambda_grid.setConstant(cap, J, kNaN);

  // Parts I and II: per-level time regressions for i <= K.
  const PiecewiseFit piecewise = fit_piecewise(table, fit_window);
  for (int i = 1; i <= k_split; ++i) {
    out.levels[static_cast<std::size_t>(i - 1)] =
        piecewise.levels[static_cast<std::size_t>(i - 1)];
    if (!out.levels[static_cast<std::size_t>(i - 1)].fit) continue;
    for (int j = 1; j <= J; ++j) {
      out.lambda_grid(i - 1, j - 1) = predict_piecewise(piecewise, i, j);
    }
  }

  // Parts I and III: per-column level regressions for j <= L.
  for (int j = 1; j <= fit_window; ++j) {
    out.columns[static_cast<std::size_t>(j - 1)] = fit_loglog(table, j, cap);
    const ColumnFit& col = out.columns[static_cast<std::size_t>(j - 1)];
    if (!col.fit) continue;
    for (int i = k_split + 1; i <= cap; ++i) {
      out.lambda_grid(i - 1, j - 1) =
          std::exp(col.mu + col.upsilon * std::log(static_cast<double>(i)));
    }
  }

  // Part IV, route A: per-level regression through the Part III rates.
  for (int i = k_split + 1; i <= cap; ++i) {
    CellRegression reg;
    for (int j = 1; j <= fit_window; ++j) {
      const double lam = out.lambda_grid(i - 1, j - 1);
      if (std::isnan(lam)) continue;
      reg.add(static_cast<double>(table.grid[static_cast<std::size_t>(j)] - table.t1()),
              std::log(lam));
    }
    LevelFit& level = out.levels[static_cast<std::size_t>(i - 1)];
    level.fit = reg.solve(level.alpha, level.beta);
  }

  // Part IV, route B: per-column regression through the Part II rates.
  for (int j = fit_window + 1; j <= J; ++j) {
    CellRegression reg;
    for (int i = 1; i <= k_split; ++i) {
      const double lam = out.lambda_grid(i - 1, j - 1);
      if (std::isnan(lam)) continue;
      reg.add(std::log(static_cast<double>(i)), std::log(lam));
    }
    ColumnFit& col = out.columns[static_cast<std::size_t>(j - 1)];
    col.fit = reg.solve(col.mu, col.upsilon);
  }

  // Part IV rates: the average of the two routes.
  for (int i = k_split + 1; i <= cap; ++i) {
    const LevelFit& level = out.levels[static_cast<std::size_t>(i - 1)];
    for (int j = fit_window + 1; j <= J; ++j) {
      const ColumnFit& col = out.columns[static_cast<std::size_t>(j - 1)];
      if (!level.fit || !col.fit) continue;
      const double dt =
          static_cast<double>(table.grid[static_cast<std::size_t>(j)] - table.t1());
      const double route_a = std::exp(level.alpha + level.beta * dt);
      const double route_b =
          std::exp(col.mu + col.upsilon * std::log(static_cast<double>(i)));
      out.lambda_grid(i - 1, j - 1) = 0.5 * (route_a + route_b);
    }
  }
  return out;
}

std::vector<BaselineForecast> baseline_forecast(
    const SeriesMap& series, const std::vector<std::string>& cohort, int t_x,
    int t_y, int test_cap, const LambdaFn& lambda, BaselineStats* stats) {
  if (t_x > t_y) throw std::invalid_argument("t_x must not exceed t_y");
  std::vector<BaselineForecast> out;
  for (const std::string& author : cohort) {
    const AuthorSeries& s = series.at(author);
    std::int64_t level = level_at(s, t_x - 1);
    if (level < 1 || level > test_cap) {
      if (stats) ++stats->excluded_cap;
      continue;
    }
    BaselineForecast forecast;
    forecast.author_id = author;
    forecast.t_x = t_x;
    bool usable = true;
    for (int year = t_x; year <= t_y; ++year) {
      const std::optional<double> lam = lambda(static_cast<int>(level), year);
      if (!lam) {
        usable = false;
        break;
      }
      forecast.p_publish.push_back(1.0 - std::exp(-*lam));
      level += std::llround(*lam);
      forecast.trajectory.push_back(static_cast<double>(level));
    }
    if (!usable) {
      if (stats) ++stats->excluded_unfit;
      continue;
    }
    out.push_back(std::move(forecast));
  }
  return out;
}

void write_level_fits_csv(std::ostream& out, const std::vector<LevelFit>& levels) {
  out << "i,alpha,beta\n";
  char buf[96];
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!levels[i].fit) continue;
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", i + 1, levels[i].alpha,
                  levels[i].beta);
    out << buf;
  }
}

void write_column_fits_csv(std::ostream& out, const std::vector<ColumnFit>& columns) {
  out << "j,mu,upsilon\n";
  char buf[96];
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (!columns[j].fit) continue;
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", j + 1, columns[j].mu,
                  columns[j].upsilon);
    out << buf;
  }
}

void write_partition_csv(std::ostream& out, const PartitionTable& table) {
  out << "i,j,n,m\n";
  for (int i = 1; i <= table.cap; ++i) {
    for (int j = 1; j <= table.columns(); ++j) {
      out << i << ',' << j << ',' << table.n(i - 1, j - 1) << ','
          << table.m(i - 1, j - 1) << '\n';
    }
  }
}

}  // namespace pubcast
