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

#include "pubcast/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <type_traits>

namespace pubcast {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(value, &used));
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw InputError("config key '" + key + "': bad number '" + value + "'");
    }
  } else {
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw InputError("config key '" + key + "': bad integer '" + value + "'");
    }
  }
  return out;
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected 'key = value'");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto as_int = [&] { return parse_number<int>(key, value); };
  auto as_i64 = [&] { return parse_number<std::int64_t>(key, value); };
  auto as_u64 = [&] { return parse_number<std::uint64_t>(key, value); };
  auto as_double = [&] { return parse_number<double>(key, value); };

  if (key == "seed") seed = as_u64();
  else if (key == "window_length") window_length = as_int();
  else if (key == "cohort.activity_year") cohort.activity_year = as_int();
  else if (key == "cohort.t0") cohort.t0 = as_int();
  else if (key == "cohort.t1") cohort.t1 = as_int();
  else if (key == "cohort.t2") cohort.t2 = as_int();
  else if (key == "recurrent.cell") {
    if (value == "lstm") cell = CellKind::kLstm;
    else if (value == "gru") cell = CellKind::kGru;
    else throw InputError("recurrent.cell must be 'lstm' or 'gru'");
  }
  else if (key == "recurrent.hidden_units") hidden_units = as_int();
  else if (key == "train.batch_size") train.batch_size = as_int();
  else if (key == "train.folds") train.folds = as_int();
  else if (key == "train.learning_rate") train.learning_rate = as_double();
  else if (key == "train.rho") train.rho = as_double();
  else if (key == "train.epsilon") train.epsilon = as_double();
  else if (key == "train.max_epochs") train.max_epochs = as_int();
  else if (key == "train.patience") train.patience = as_int();
  else if (key == "train.norm_scale") train.norm_scale = as_double();
  else if (key == "train.target_year") train_target_year = as_int();
  else if (key == "powerlaw.q") powerlaw.q = as_double();
  else if (key == "powerlaw.beta1") powerlaw.beta1 = as_double();
  else if (key == "powerlaw.beta2") powerlaw.beta2 = as_double();
  else if (key == "forecast.t_x") t_x = as_int();
  else if (key == "forecast.t_y") t_y = as_int();
  else if (key == "forecast.rollouts") rollouts = as_i64();
  else if (key == "forecast.mode") mode = value;
  else if (key == "forecast.const_rate") const_rate = as_double();
  else if (key == "report.level_cap") level_cap = as_int();
  else if (key == "baseline.piecewise.levels") piecewise_levels = as_int();
  else if (key == "baseline.grid_columns") grid_columns = as_int();
  else if (key == "baseline.fit_window") fit_window = as_int();
  else if (key == "baseline.combined.levels") combined_levels = as_int();
  else if (key == "baseline.combined.test_levels") combined_test_levels = as_int();
  else if (key == "baseline.combined.split") combined_split = as_int();
  else if (key == "baseline.grid_start") grid_start = as_int();
  else if (key == "synth.authors") synth.n_authors = as_i64();
  else if (key == "synth.first_year") synth.first_year = as_int();
  else if (key == "synth.last_year") synth.last_year = as_int();
  else if (key == "synth.rate_min") synth.rate_min = as_double();
  else if (key == "synth.rate_max") synth.rate_max = as_double();
  else if (key == "synth.exponent") synth.exponent = as_double();
  else if (key == "synth.force_active_year") synth.force_active_year = as_int();
  else throw InputError("unknown config key '" + key + "'");
}

void RunConfig::print(std::ostream& out) const {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  out << "baseline.combined.levels = " << combined_levels << '\n'
      << "baseline.combined.split = " << combined_split << '\n'
      << "baseline.combined.test_levels = " << combined_test_levels << '\n'
      << "baseline.fit_window = " << fit_window << '\n'
      << "baseline.grid_columns = " << grid_columns << '\n'
      << "baseline.grid_start = " << resolved_grid_start() << '\n'
      << "baseline.piecewise.levels = " << piecewise_levels << '\n'
      << "cohort.activity_year = " << cohort.activity_year << '\n'
      << "cohort.t0 = " << cohort.t0 << '\n'
      << "cohort.t1 = " << cohort.t1 << '\n'
      << "cohort.t2 = " << cohort.t2 << '\n'
      << "forecast.const_rate = " << num(const_rate) << '\n'
      << "forecast.mode = " << mode << '\n'
      << "forecast.rollouts = " << rollouts << '\n'
      << "forecast.t_x = " << t_x << '\n'
      << "forecast.t_y = " << t_y << '\n'
      << "powerlaw.beta1 = " << num(powerlaw.beta1) << '\n'
      << "powerlaw.beta2 = " << num(powerlaw.beta2) << '\n'
      << "powerlaw.q = " << num(powerlaw.q) << '\n'
      << "recurrent.cell = " << to_string(cell) << '\n'
      << "recurrent.hidden_units = " << hidden_units << '\n'
      << "report.level_cap = " << level_cap << '\n'
      << "seed = " << seed << '\n'
      << "synth.authors = " << synth.n_authors << '\n'
      << "synth.exponent = " << num(synth.exponent) << '\n'
      << "synth.first_year = " << synth.first_year << '\n'
      << "synth.force_active_year = " << synth.force_active_year << '\n'
      << "synth.last_year = " << synth.last_year << '\n'
      << "synth.rate_max = " << num(synth.rate_max) << '\n'
      << "synth.rate_min = " << num(synth.rate_min) << '\n'
      << "train.batch_size = " << train.batch_size << '\n'
      << "train.epsilon = " << num(train.epsilon) << '\n'
      << "train.folds = " << train.folds << '\n'
      << "train.learning_rate = " << num(train.learning_rate) << '\n'
      << "train.max_epochs = " << train.max_epochs << '\n'
      << "train.norm_scale = " << num(train.norm_scale) << '\n'
      << "train.patience = " << train.patience << '\n'
      << "train.rho = " << num(train.rho) << '\n'
      << "train.target_year = " << resolved_target_year() << '\n'
      << "window_length = " << window_length << '\n';
}

}  // namespace pubcast
