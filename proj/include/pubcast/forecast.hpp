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
// The hybrid forecaster: a recurrent one-step prediction for the first
// horizon year, then iterated power-law/Poisson compound increments.
// Ablation modes swap the increment source while keeping the recurrent
// first step.

#ifndef PUBCAST_FORECAST_HPP_
#define PUBCAST_FORECAST_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pubcast/corpus.hpp"
#include "pubcast/recurrent.hpp"
#include "pubcast/stochastic.hpp"

namespace pubcast {

enum class ForecastMode { kFull, kLstmOnly, kConstPoisson, kUnitScale };

ForecastMode parse_mode(const std::string& name);  // throws InputError
std::string to_string(ForecastMode mode);

struct HybridModel {
  RecurrentNet<double> net;
  double norm_scale = 1.0;
  PowerLawParams powerlaw;
  ForecastMode mode = ForecastMode::kFull;
  double const_rate = 0.0;  // Poisson mean for kConstPoisson
};

// Copy of `model` with the increment source swapped.
HybridModel ablate(const HybridModel& model, ForecastMode mode,
                   double const_rate = 0.0);

struct ForecastConfig {
  int t_x = 2001;
  int t_y = 2018;
  std::int64_t rollouts = 1000;
  std::uint64_t seed = 42;

  bool valid() const { return t_x <= t_y && rollouts >= 1; }
};

// One annual increment draw under the model's mode, given the previous
// cumulative count (real-valued during rollouts).
std::int64_t increment_sample(const HybridModel& model, double h_prev,
                              RngStream& rng);

// Denormalized recurrent one-step estimate from the 12-year window ending
// at t_x - 1; always >= 0 (rectified head).
double recurrent_estimate(const HybridModel& model, const AuthorSeries& series,
                          int t_x);

// First horizon year: recurrent estimate plus a sampled increment,
// clamped below by h(t_x - 1) so cumulative counts cannot decrease.
// `clamped`, when given, is incremented if the clamp engaged.
double predict_first_year(const HybridModel& model, const AuthorSeries& series,
                          int t_x, RngStream& rng, std::size_t* clamped = nullptr);

// Trajectory of predicted cumulative counts for t_x..t_y (inclusive).
std::vector<double> rollout(const HybridModel& model, const AuthorSeries& series,
                            const ForecastConfig& config, RngStream& rng,
                            std::size_t* clamped = nullptr);

struct AuthorForecast {
  std::string author_id;
  int t_x = 0;
  std::vector<double> realization;    // one designated rollout
  std::vector<double> ensemble_mean;  // mean over config.rollouts rollouts
  std::vector<double> p_publish;      // per-year publication probability
};

struct ForecastStats {
  std::size_t clamped_first_years = 0;
  std::size_t first_year_draws = 0;
};

// Forecasts every cohort author. RNG streams are keyed by
// (seed, author, rollout), so results do not depend on author order or
// any parallel schedule.
std::vector<AuthorForecast> forecast_cohort(const HybridModel& model,
                                            const SeriesMap& series,
                                            const std::vector<std::string>& cohort,
                                            const ForecastConfig& config,
                                            ForecastStats* stats = nullptr);

// One-step probability that the author publishes in `year`, from the
// true series: the Monte Carlo frequency over `rollouts` continuations of
// a predicted increment >= 0.5.
double publication_probability(const HybridModel& model, const AuthorSeries& series,
                               int year, std::int64_t rollouts, std::uint64_t seed);

// Mean annual increment over the cohort in years [from, to]; the default
// constant for the const-Poisson ablation.
double mean_annual_increment(const SeriesMap& series,
                             const std::vector<std::string>& cohort, int from,
                             int to);

// Forecast file: `author_id,year,h_true,h_hat_realization,h_hat_mean,
// p_publish`, one row per (author, year); h_true is empty past the end of
// the truth series.
struct ForecastRow {
  std::string author_id;
  int year = 0;
  std::optional<std::int64_t> h_true;
  double realization = 0.0;
  double mean = 0.0;
  double p_publish = 0.0;
};

void write_forecast_csv(std::ostream& out, const std::vector<AuthorForecast>& forecasts,
                        const SeriesMap& series);
std::vector<ForecastRow> read_forecast_csv(std::istream& in);

}  // namespace pubcast

#endif  // PUBCAST_FORECAST_HPP_
