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

#ifndef PUBCAST_CONFIG_HPP_
#define PUBCAST_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "pubcast/corpus.hpp"
#include "pubcast/recurrent.hpp"
#include "pubcast/stochastic.hpp"
#include "pubcast/training.hpp"

namespace pubcast {

// One flat `key = value` configuration; every field starts at its
// documented default and can be overridden by a config file and then by
// command-line flags. All randomness flows from `seed`.
struct RunConfig {
  std::uint64_t seed = 42;

  CohortSpec cohort;        // activity 2000, span 1951..2013..2018
  int window_length = 12;

  CellKind cell = CellKind::kLstm;
  int hidden_units = 32;
  TrainConfig train;        // batch 5, folds 4, RMSprop(1e-3, 0.9, 1e-8)
  int train_target_year = 0;  // 0 = cohort.t1

  PowerLawParams powerlaw;  // q 0.1, beta1 0.33, beta2 1.22

  int t_x = 2001;
  int t_y = 2018;
  std::int64_t rollouts = 1000;
  std::string mode = "full";
  double const_rate = -1.0;  // < 0 = training mean annual increment

  int level_cap = 15;

  // Baseline grids: annual columns t_0..t_J with t_0 = grid_start.
  int piecewise_levels = 40;   // I
  int grid_columns = 23;       // J
  int fit_window = 14;         // L
  int combined_levels = 180;   // I
  int combined_test_levels = 60;  // I1
  int combined_split = 42;     // K
  int grid_start = 0;          // 0 = t_y - grid_columns

  SynthConfig synth;

  // Parses `key = value` lines ('#' comments, blank lines ignored).
  void load_file(const std::string& path);
  // Applies one assignment; throws InputError on unknown keys/bad values.
  void set(const std::string& key, const std::string& value);
  // Fully resolved configuration, one sorted `key = value` line each.
  void print(std::ostream& out) const;

  int resolved_target_year() const {
    return train_target_year == 0 ? cohort.t1 : train_target_year;
  }
  int resolved_grid_start() const {
    return grid_start == 0 ? t_y - grid_columns : grid_start;
  }
};

}  // namespace pubcast

#endif  // PUBCAST_CONFIG_HPP_
