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
// pubcast: cohort construction, training, forecasting, shallow baselines,
// and report generation over bibliographic record streams. All outputs
// are CSV; all randomness flows from one seed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "pubcast/baselines.hpp"
#include "pubcast/config.hpp"
#include "pubcast/corpus.hpp"
#include "pubcast/evaluation.hpp"
#include "pubcast/forecast.hpp"
#include "pubcast/training.hpp"

namespace {

using namespace pubcast;

// Writes through a temp file in the same directory and renames, so
// partially written outputs are never observed.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& fill) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + tmp.string());
    fill(out);
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open: " + path);
  return in;
}

SeriesMap load_cache(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_series_cache(in);
}

HybridModel load_model(const RunConfig& config, const std::string& checkpoint,
                       const SeriesMap& series,
                       const std::vector<std::string>& cohort) {
  Checkpoint ckpt = load_checkpoint(checkpoint);
  HybridModel model;
  model.net = std::move(ckpt.net);
  model.norm_scale = ckpt.norm_scale;
  model.powerlaw = config.powerlaw;
  double const_rate = config.const_rate;
  const ForecastMode mode = parse_mode(config.mode);
  if (mode == ForecastMode::kConstPoisson && const_rate < 0.0) {
    // Mean annual increment over the window+target span the network was
    // trained on.
    const int target = config.resolved_target_year();
    const_rate = mean_annual_increment(series, cohort,
                                       target - config.window_length, target);
    std::cerr << "const-Poisson rate from training data: " << const_rate << "\n";
  }
  return ablate(model, mode, const_rate);
}

int cmd_ingest(const RunConfig& config, const std::string& input,
               const std::string& format, const std::string& output) {
  RecordFormat fmt;
  if (format == "csv") fmt = RecordFormat::kCsv;
  else if (format == "dblp_xml") fmt = RecordFormat::kDblpXml;
  else throw InputError("format must be csv or dblp_xml");

  std::ifstream in = open_input(input);
  ParseStats parse_stats;
  const std::vector<PublicationRecord> records = parse_records(in, fmt, &parse_stats);
  BuildStats build_stats;
  const SeriesMap series =
      build_series(records, config.cohort.t0, config.cohort.t2, &build_stats);
  atomic_write(output, [&](std::ostream& out) { write_series_cache(out, series); });
  std::cerr << "ingested " << parse_stats.records << " records ("
            << parse_stats.rejected_year << " rejected by year), "
            << series.size() << " authors; dropped "
            << build_stats.dropped_before_t0 << " before " << config.cohort.t0
            << ", " << build_stats.dropped_after_end << " after "
            << config.cohort.t2 << "\n";
  return 0;
}

int cmd_synth(const RunConfig& config, const std::string& output) {
  const std::vector<PublicationRecord> records = synth_corpus(config.synth, config.seed);
  atomic_write(output, [&](std::ostream& out) { write_records_csv(out, records); });
  std::cerr << "wrote " << records.size() << " synthetic records for "
            << config.synth.n_authors << " authors\n";
  return 0;
}

int cmd_train(const RunConfig& config, const std::string& cache,
              const std::string& output, const std::string& cv_path) {
  const SeriesMap series = load_cache(cache);
  const std::vector<std::string> cohort = select_cohort(series, config.cohort);
  const int target = config.resolved_target_year();
  std::size_t skipped = 0;
  const std::vector<WindowSample> samples = make_windows(
      series, cohort, target - 1, config.window_length, target, &skipped);
  if (samples.empty()) throw InputError("no training samples in cache");

  RecurrentSpec spec;
  spec.cell = config.cell;
  spec.hidden_units = config.hidden_units;
  spec.window_length = config.window_length;
  auto [net, report] = train(samples, spec, config.train, config.seed);
  save_checkpoint(output, net, report.norm_scale);

  if (!cv_path.empty()) {
    atomic_write(cv_path, [&](std::ostream& out) {
      out << "fold,best_epoch,best_val_mse,epochs_run,selected_epoch,mean_val_mse\n";
      char buf[128];
      for (std::size_t f = 0; f < report.folds.size(); ++f) {
        const CvFold& fold = report.folds[f];
        std::snprintf(buf, sizeof buf, "%zu,%d,%.9g,%zu,%d,%.9g\n", f + 1,
                      fold.best_epoch, fold.best_val_mse, fold.val_mse.size(),
                      report.selected_epoch, report.mean_val_mse);
        out << buf;
      }
    });
  }
  std::cerr << "trained " << to_string(spec.cell) << " on " << samples.size()
            << " authors (skipped " << skipped << "), selected epoch "
            << report.selected_epoch << ", mean val MSE " << report.mean_val_mse
            << ", scale " << report.norm_scale << "\n";
  return 0;
}

// Long-horizon rollout forecast (default) or one-step forecasts from the
// true series at every year.
int cmd_forecast(const RunConfig& config, const std::string& cache,
                 const std::string& checkpoint, const std::string& output,
                 bool one_step) {
  const SeriesMap series = load_cache(cache);
  const std::vector<std::string> cohort = select_cohort(series, config.cohort);
  if (cohort.empty()) throw InputError("empty cohort");
  const HybridModel model = load_model(config, checkpoint, series, cohort);

  ForecastConfig fc;
  fc.t_x = config.t_x;
  fc.t_y = config.t_y;
  fc.rollouts = config.rollouts;
  fc.seed = config.seed;
  if (!fc.valid()) throw InputError("forecast needs t_x <= t_y and rollouts >= 1");
  if (fc.t_x - 1 > series.begin()->second.last_year()) {
    throw InputError("cache ends before the input window at t_x - 1");
  }

  std::vector<AuthorForecast> forecasts;
  if (one_step) {
    for (const std::string& author : cohort) {
      const AuthorSeries& s = series.at(author);
      if (s.last_year() < fc.t_y) {
        throw InputError("one-step forecast needs truth through " +
                         std::to_string(fc.t_y));
      }
      AuthorForecast f;
      f.author_id = author;
      f.t_x = fc.t_x;
      const std::uint64_t author_key = fnv1a64(author);
      for (int year = fc.t_x; year <= fc.t_y; ++year) {
        const double h_prev =
            year - 1 < s.base_year ? 0.0 : static_cast<double>(s.at(year - 1));
        const double ybar = recurrent_estimate(model, s, year);
        double mean = 0.0;
        double first = 0.0;
        for (std::int64_t r = 0; r < fc.rollouts; ++r) {
          RngStream rng(fc.seed, author_key,
                        fnv1a64("onestep") + static_cast<std::uint64_t>(year),
                        static_cast<std::uint64_t>(r));
          const double value = std::max(
              ybar + static_cast<double>(increment_sample(model, h_prev, rng)),
              h_prev);
          if (r == 0) first = value;
          mean += value;
        }
        f.realization.push_back(first);
        f.ensemble_mean.push_back(mean / static_cast<double>(fc.rollouts));
        f.p_publish.push_back(
            publication_probability(model, s, year, fc.rollouts, fc.seed));
      }
      forecasts.push_back(std::move(f));
    }
  } else {
    ForecastStats stats;
    forecasts = forecast_cohort(model, series, cohort, fc, &stats);
    if (stats.first_year_draws > 0) {
      std::cerr << "first-year clamp rate: "
                << static_cast<double>(stats.clamped_first_years) /
                       static_cast<double>(stats.first_year_draws)
                << "\n";
    }
  }
  atomic_write(output,
               [&](std::ostream& out) { write_forecast_csv(out, forecasts, series); });
  std::cerr << "forecast " << forecasts.size() << " authors over [" << fc.t_x
            << ", " << fc.t_y << "] in mode " << to_string(model.mode) << "\n";
  return 0;
}

int cmd_baseline(const RunConfig& config, const std::string& cache,
                 const std::string& model_name, const std::string& prefix) {
  const SeriesMap series = load_cache(cache);
  const std::vector<std::string> cohort = select_cohort(series, config.cohort);
  if (cohort.empty()) throw InputError("empty cohort");

  std::vector<int> grid(static_cast<std::size_t>(config.grid_columns) + 1);
  std::iota(grid.begin(), grid.end(), config.resolved_grid_start());
  if (grid.back() > series.begin()->second.last_year()) {
    throw InputError("baseline grid extends past the cache's last year");
  }

  LambdaFn lambda;
  int test_cap = 0;
  PartitionTable table;
  if (model_name == "piecewise") {
    table = build_partition(series, cohort, grid, config.piecewise_levels);
    const PiecewiseFit fit = fit_piecewise(table, config.fit_window);
    std::cerr << "piecewise fit: " << fit.unfit_levels << " unfit levels, "
              << fit.dropped_empty_cells << " empty cells dropped\n";
    atomic_write(prefix + "_levels.csv",
                 [&](std::ostream& out) { write_level_fits_csv(out, fit.levels); });
    test_cap = config.piecewise_levels;
    lambda = [fit](int level, int year) { return fit.lambda(level, year); };
  } else if (model_name == "combined") {
    table = build_partition(series, cohort, grid, config.combined_levels);
    const CombinedFit fit = fit_combined(table, config.combined_levels,
                                         config.combined_split, config.fit_window);
    atomic_write(prefix + "_levels.csv",
                 [&](std::ostream& out) { write_level_fits_csv(out, fit.levels); });
    atomic_write(prefix + "_columns.csv",
                 [&](std::ostream& out) { write_column_fits_csv(out, fit.columns); });
    test_cap = config.combined_test_levels;
    lambda = [fit](int level, int year) { return fit.lambda(level, year); };
  } else {
    throw InputError("baseline model must be piecewise or combined");
  }
  atomic_write(prefix + "_partition.csv",
               [&](std::ostream& out) { write_partition_csv(out, table); });

  BaselineStats stats;
  const std::vector<BaselineForecast> forecasts = baseline_forecast(
      series, cohort, config.t_x, config.t_y, test_cap, lambda, &stats);

  // Shared forecast schema; the baseline trajectory is deterministic, so
  // the realization and mean columns coincide.
  std::vector<AuthorForecast> rows;
  rows.reserve(forecasts.size());
  for (const BaselineForecast& f : forecasts) {
    AuthorForecast row;
    row.author_id = f.author_id;
    row.t_x = f.t_x;
    row.realization = f.trajectory;
    row.ensemble_mean = f.trajectory;
    row.p_publish = f.p_publish;
    rows.push_back(std::move(row));
  }
  atomic_write(prefix + "_forecast.csv",
               [&](std::ostream& out) { write_forecast_csv(out, rows, series); });
  std::cerr << "baseline " << model_name << ": " << forecasts.size()
            << " authors forecast, " << stats.excluded_cap << " beyond cap, "
            << stats.excluded_unfit << " on unfit levels\n";
  return 0;
}

int cmd_report(const RunConfig& config, const std::string& forecast_path,
               const std::string& cache, const std::string& out_dir,
               const std::string& auc_group) {
  const SeriesMap truth = load_cache(cache);
  std::ifstream in = open_input(forecast_path);
  const std::vector<ForecastRow> rows = read_forecast_csv(in);
  if (rows.empty()) throw InputError("empty forecast file");
  int t_x = rows.front().year, t_y = rows.front().year;
  for (const ForecastRow& row : rows) {
    t_x = std::min(t_x, row.year);
    t_y = std::max(t_y, row.year);
  }

  const std::vector<EvalSeries> series =
      collect_eval_series(rows, truth, t_x, t_y, config.level_cap);
  if (series.empty()) throw InputError("no tested authors within the level cap");

  std::filesystem::create_directories(out_dir);
  const TrendReport trend = trend_report(series, t_x, t_y, config.level_cap);
  atomic_write(out_dir + "/trend.csv",
               [&](std::ostream& out) { write_trend_csv(out, trend); });
  atomic_write(out_dir + "/trend_levels.csv",
               [&](std::ostream& out) { write_trend_levels_csv(out, trend); });

  const int truth_end = truth.begin()->second.last_year();
  for (int year = t_x; year <= std::min(t_y, truth_end); ++year) {
    const DistributionReport dist = distribution_report(series, t_x, year);
    atomic_write(out_dir + "/dist_" + std::to_string(year) + ".csv",
                 [&](std::ostream& out) { write_distribution_csv(out, dist); });
  }

  const AucGrouping grouping = auc_group == "predicted"
                                   ? AucGrouping::kPredictedLevel
                                   : AucGrouping::kTrueLevel;
  const std::vector<AucCell> cells =
      auc_report(series, t_x, t_y, config.level_cap, grouping);
  atomic_write(out_dir + "/auc.csv",
               [&](std::ostream& out) { write_auc_csv(out, cells); });
  std::cerr << "reports for " << series.size() << " tested authors written to "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"publication productivity forecasting toolkit"};
  app.require_subcommand(0, 1);

  RunConfig config;
  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  std::string flag_seed, flag_tx, flag_ty, flag_rollouts, flag_mode, flag_cap;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--set", overrides, "override a config key (key=value)");
  app.add_flag("--print-config", print_config, "print the resolved configuration");
  app.add_option("--seed", flag_seed, "master random seed");
  app.add_option("--t-x", flag_tx, "first forecast year");
  app.add_option("--t-y", flag_ty, "last forecast year");
  app.add_option("--rollouts", flag_rollouts, "Monte Carlo rollouts per author");
  app.add_option("--mode", flag_mode, "full|lstm_only|const_poisson|unit_scale");
  app.add_option("--level-cap", flag_cap, "highest tested publication level");

  std::string input, output, format = "csv", cache, checkpoint, cv_path;
  std::string baseline_model = "piecewise", prefix, out_dir = "reports";
  std::string auc_group = "true";
  bool one_step = false;

  CLI::App* ingest = app.add_subcommand("ingest", "records -> series cache");
  ingest->fallthrough();
  ingest->add_option("--input", input, "records file")->required();
  ingest->add_option("--format", format, "csv|dblp_xml");
  ingest->add_option("--output", output, "series cache path")->required();

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->fallthrough();
  synth->add_option("--output", output, "records CSV path")->required();

  CLI::App* train_cmd = app.add_subcommand("train", "fit the recurrent predictor");
  train_cmd->fallthrough();
  train_cmd->add_option("--cache", cache, "series cache")->required();
  train_cmd->add_option("--output", output, "checkpoint path")->required();
  train_cmd->add_option("--cv-report", cv_path, "cross-validation report CSV");

  CLI::App* forecast_cmd = app.add_subcommand("forecast", "hybrid forecasts");
  forecast_cmd->fallthrough();
  forecast_cmd->add_option("--cache", cache, "series cache")->required();
  forecast_cmd->add_option("--checkpoint", checkpoint, "trained weights")->required();
  forecast_cmd->add_option("--output", output, "forecast CSV")->required();
  forecast_cmd->add_flag("--one-step", one_step,
                         "one-step forecasts from the true series each year");

  CLI::App* baseline = app.add_subcommand("baseline", "shallow baseline forecasts");
  baseline->fallthrough();
  baseline->add_option("--cache", cache, "series cache")->required();
  baseline->add_option("--model", baseline_model, "piecewise|combined");
  baseline->add_option("--output-prefix", prefix, "prefix for fit/forecast CSVs")
      ->required();

  CLI::App* report = app.add_subcommand("report", "trend/distribution/AUC CSVs");
  report->fallthrough();
  report->add_option("--forecast", input, "forecast CSV")->required();
  report->add_option("--cache", cache, "truth series cache")->required();
  report->add_option("--output-dir", out_dir, "report directory");
  report->add_option("--auc-group", auc_group,
                     "group AUC rows by true|predicted level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) config.load_file(config_path);
    for (const std::string& kv : overrides) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    // Dedicated flags take precedence over the file and --set.
    if (!flag_seed.empty()) config.set("seed", flag_seed);
    if (!flag_tx.empty()) config.set("forecast.t_x", flag_tx);
    if (!flag_ty.empty()) config.set("forecast.t_y", flag_ty);
    if (!flag_rollouts.empty()) config.set("forecast.rollouts", flag_rollouts);
    if (!flag_mode.empty()) config.set("forecast.mode", flag_mode);
    if (!flag_cap.empty()) config.set("report.level_cap", flag_cap);
    if (print_config) {
      config.print(std::cout);
      if (app.get_subcommands().empty()) return 0;
    }
    if (ingest->parsed()) return cmd_ingest(config, input, format, output);
    if (synth->parsed()) return cmd_synth(config, output);
    if (train_cmd->parsed()) return cmd_train(config, cache, output, cv_path);
    if (forecast_cmd->parsed()) {
      return cmd_forecast(config, cache, checkpoint, output, one_step);
    }
    if (baseline->parsed()) {
      return cmd_baseline(config, cache, baseline_model, prefix);
    }
    if (report->parsed()) {
      return cmd_report(config, input, cache, out_dir, auc_group);
    }
    std::cerr << app.help();
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
