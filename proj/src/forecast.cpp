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

#include "pubcast/forecast.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pubcast {

namespace {

constexpr double kPublishThreshold = 0.5;

double true_count_or_zero(const AuthorSeries& series, int year) {
  return year < series.base_year ? 0.0 : static_cast<double>(series.at(year));
}

}  // namespace

ForecastMode parse_mode(const std::string& name) {
  if (name == "full") return ForecastMode::kFull;
  if (name == "lstm_only") return ForecastMode::kLstmOnly;
  if (name == "const_poisson") return ForecastMode::kConstPoisson;
  if (name == "unit_scale") return ForecastMode::kUnitScale;
  throw InputError("unknown forecast mode '" + name + "'");
}

std::string to_string(ForecastMode mode) {
  switch (mode) {
    case ForecastMode::kFull: return "full";
    case ForecastMode::kLstmOnly: return "lstm_only";
    case ForecastMode::kConstPoisson: return "const_poisson";
    case ForecastMode::kUnitScale: return "unit_scale";
  }
  throw std::logic_error("unreachable");
}

HybridModel ablate(const HybridModel& model, ForecastMode mode, double const_rate) {
  if (mode == ForecastMode::kConstPoisson && const_rate < 0.0) {
    throw std::invalid_argument("const-Poisson rate must be >= 0");
  }
  if (mode == ForecastMode::kFull && !model.powerlaw.valid()) {
    throw std::invalid_argument("full mode needs valid power-law params");
  }
  HybridModel out = model;
  out.mode = mode;
  out.const_rate = mode == ForecastMode::kConstPoisson ? const_rate : 0.0;
  return out;
}

std::int64_t increment_sample(const HybridModel& model, double h_prev,
                              RngStream& rng) {
  switch (model.mode) {
    case ForecastMode::kFull:
      return compound_increment(h_prev, model.powerlaw, rng);
    case ForecastMode::kLstmOnly:
      return 0;
    case ForecastMode::kConstPoisson:
      return poisson_sample(model.const_rate, rng);
    case ForecastMode::kUnitScale:
      // Power law with its scale pinned to 1, then Poisson.
      return poisson_sample(std::pow(rng.next_unit_open(), 1.0 / model.powerlaw.q),
                            rng);
  }
  throw std::logic_error("unreachable");
}

double recurrent_estimate(const HybridModel& model, const AuthorSeries& series,
                          int t_x) {
  const Eigen::VectorXd window =
      input_window(series, t_x - 1, model.net.spec().window_length);
  return model.norm_scale *
         forward<double>(model.net, window / model.norm_scale);
}

double predict_first_year(const HybridModel& model, const AuthorSeries& series,
                          int t_x, RngStream& rng, std::size_t* clamped) {
  const double h_prev = true_count_or_zero(series, t_x - 1);
  const double ybar = recurrent_estimate(model, series, t_x);
  const double y = static_cast<double>(increment_sample(model, h_prev, rng));
  if (ybar + y < h_prev) {
    if (clamped) ++*clamped;
    return h_prev;
  }
  return ybar + y;
}

std::vector<double> rollout(const HybridModel& model, const AuthorSeries& series,
                            const ForecastConfig& config, RngStream& rng,
                            std::size_t* clamped) {
  if (!config.valid()) throw std::invalid_argument("invalid forecast config");
  std::vector<double> traj;
  traj.reserve(static_cast<std::size_t>(config.t_y - config.t_x + 1));
  traj.push_back(predict_first_year(model, series, config.t_x, rng, clamped));
  for (int year = config.t_x + 1; year <= config.t_y; ++year) {
    traj.push_back(traj.back() +
                   static_cast<double>(increment_sample(model, traj.back(), rng)));
  }
  return traj;
}

std::vector<AuthorForecast> forecast_cohort(const HybridModel& model,
                                            const SeriesMap& series,
                                            const std::vector<std::string>& cohort,
                                            const ForecastConfig& config,
                                            ForecastStats* stats) {
  std::vector<AuthorForecast> out;
  out.reserve(cohort.size());
  const std::uint64_t real_key = fnv1a64("real");
  for (const std::string& author : cohort) {
    const auto it = series.find(author);
    if (it == series.end()) throw InputError("cohort author missing: " + author);
    const AuthorSeries& s = it->second;
    const std::uint64_t author_key = fnv1a64(author);
    const std::size_t horizon = static_cast<std::size_t>(config.t_y - config.t_x + 1);

    AuthorForecast forecast;
    forecast.author_id = author;
    forecast.t_x = config.t_x;
    {
      RngStream rng(config.seed, author_key, real_key);
      std::size_t clamped = 0;
      forecast.realization = rollout(model, s, config, rng, &clamped);
      if (stats) {
        stats->clamped_first_years += clamped;
        ++stats->first_year_draws;
      }
    }

    forecast.ensemble_mean.assign(horizon, 0.0);
    forecast.p_publish.assign(horizon, 0.0);
    const double h_prev = true_count_or_zero(s, config.t_x - 1);
    for (std::int64_t r = 0; r < config.rollouts; ++r) {
      RngStream rng(config.seed, author_key, static_cast<std::uint64_t>(r));
      const std::vector<double> traj = rollout(model, s, config, rng);
      double prev = h_prev;
      for (std::size_t k = 0; k < horizon; ++k) {
        forecast.ensemble_mean[k] += traj[k];
        if (traj[k] - prev >= kPublishThreshold) forecast.p_publish[k] += 1.0;
        prev = traj[k];
      }
    }
    const double denom = static_cast<double>(config.rollouts);
    for (std::size_t k = 0; k < horizon; ++k) {
      forecast.ensemble_mean[k] /= denom;
      forecast.p_publish[k] /= denom;
    }
    out.push_back(std::move(forecast));
  }
  return out;
}

double publication_probability(const HybridModel& model, const AuthorSeries& series,
                               int year, std::int64_t rollouts, std::uint64_t seed) {
  if (rollouts < 1) throw std::invalid_argument("rollout count must be >= 1");
  const double h_prev = true_count_or_zero(series, year - 1);
  const double ybar = recurrent_estimate(model, series, year);
  const std::uint64_t author_key = fnv1a64(series.author_id);
  const std::uint64_t step_key = fnv1a64("onestep") + static_cast<std::uint64_t>(year);
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < rollouts; ++r) {
    RngStream rng(seed, author_key, step_key, static_cast<std::uint64_t>(r));
    const double y = static_cast<double>(increment_sample(model, h_prev, rng));
    const double predicted = std::max(ybar + y, h_prev);
    if (predicted - h_prev >= kPublishThreshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rollouts);
}

double mean_annual_increment(const SeriesMap& series,
                             const std::vector<std::string>& cohort, int from,
                             int to) {
  if (from > to) throw std::invalid_argument("mean_annual_increment: from > to");
  if (cohort.empty()) return 0.0;
  double total = 0.0;
  for (const std::string& author : cohort) {
    const AuthorSeries& s = series.at(author);
    total += true_count_or_zero(s, to) - true_count_or_zero(s, from - 1);
  }
  return total / (static_cast<double>(cohort.size()) *
                  static_cast<double>(to - from + 1));
}

void write_forecast_csv(std::ostream& out, const std::vector<AuthorForecast>& forecasts,
                        const SeriesMap& series) {
  out << "author_id,year,h_true,h_hat_realization,h_hat_mean,p_publish\n";
  char buf[128];
  for (const AuthorForecast& f : forecasts) {
    const auto it = series.find(f.author_id);
    for (std::size_t k = 0; k < f.realization.size(); ++k) {
      const int year = f.t_x + static_cast<int>(k);
      out << f.author_id << ',' << year << ',';
      if (it != series.end() && year <= it->second.last_year()) {
        out << it->second.at(year);
      }
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f", f.realization[k],
                    f.ensemble_mean[k], f.p_publish[k]);
      out << buf << '\n';
    }
  }
}

std::vector<ForecastRow> read_forecast_csv(std::istream& in) {
  std::vector<ForecastRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("author_id,", 0) == 0) continue;
    // Split the five numeric fields off the right; the author id may
    // contain commas.
    std::size_t cuts[5];
    std::size_t pos = line.size();
    for (int k = 4; k >= 0; --k) {
      pos = line.rfind(',', pos - 1);
      if (pos == std::string::npos) {
        throw InputError("forecast csv line " + std::to_string(lineno) +
                         ": expected 6 fields");
      }
      cuts[k] = pos;
    }
    auto field = [&](int k) {
      const std::size_t beg = cuts[k] + 1;
      const std::size_t end = k == 4 ? line.size() : cuts[k + 1];
      return line.substr(beg, end - beg);
    };
    ForecastRow row;
    row.author_id = line.substr(0, cuts[0]);
    try {
      row.year = std::stoi(field(0));
      const std::string h_true = field(1);
      if (!h_true.empty()) row.h_true = std::stoll(h_true);
      row.realization = std::stod(field(2));
      row.mean = std::stod(field(3));
      row.p_publish = std::stod(field(4));
    } catch (const std::exception&) {
      throw InputError("forecast csv line " + std::to_string(lineno) +
                       ": bad numeric field");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pubcast
