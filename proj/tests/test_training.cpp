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

#include <doctest.h>

#include <vector>

#include "pubcast/training.hpp"

using namespace pubcast;

namespace {

// Small spec keeps the unit suite quick; the full 32-unit regime runs in
// the acceptance suite.
RecurrentSpec small_spec() {
  RecurrentSpec spec;
  spec.hidden_units = 8;
  spec.window_length = 6;
  return spec;
}

std::vector<WindowSample> constant_samples(int copies, double value) {
  std::vector<WindowSample> samples;
  for (int i = 0; i < copies; ++i) {
    WindowSample s;
    s.author_id = "a" + std::to_string(i);
    s.input = Eigen::VectorXd::Constant(6, value);
    s.target = value;
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace

TEST_CASE("training memorizes a constant sample") {
  TrainConfig config;
  config.max_epochs = 500;
  const auto samples = constant_samples(20, 3.0);
  const auto [net, report] = train(samples, small_spec(), config, 5);

  REQUIRE(report.folds.size() == 4);
  for (const CvFold& fold : report.folds) {
    CHECK(fold.best_val_mse < 1e-4);  // normalized MSE, target is constant
  }
  // Final model predicts the constant (normalized input, denormalized out).
  const double scale = report.norm_scale;
  CHECK(scale == 3.0);
  Eigen::VectorXd window = Eigen::VectorXd::Constant(6, 3.0 / scale);
  CHECK(scale * forward(net, window) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("cv report mean equals the mean of the fold minima") {
  TrainConfig config;
  config.max_epochs = 30;
  const auto samples = constant_samples(12, 2.0);
  const auto [net, report] = train(samples, small_spec(), config, 9);
  double sum = 0.0;
  for (const CvFold& fold : report.folds) sum += fold.best_val_mse;
  CHECK(report.mean_val_mse == doctest::Approx(sum / 4.0).epsilon(1e-12));
  CHECK(report.selected_epoch >= 1);
  CHECK(report.shuffle.size() == samples.size());
}

TEST_CASE("training is bit-deterministic per seed") {
  TrainConfig config;
  config.max_epochs = 15;
  config.patience = 15;
  std::vector<WindowSample> samples;
  RngStream rng(3);
  for (int i = 0; i < 13; ++i) {
    WindowSample s;
    s.author_id = "a" + std::to_string(i);
    s.input.resize(6);
    double level = 0.0;
    for (int t = 0; t < 6; ++t) {
      level += rng.next_unit() * 2.0;
      s.input[t] = level;
    }
    s.target = level + rng.next_unit();
    samples.push_back(std::move(s));
  }
  const auto [net_a, report_a] = train(samples, small_spec(), config, 11);
  const auto [net_b, report_b] = train(samples, small_spec(), config, 11);
  CHECK(net_a.flat() == net_b.flat());  // bit-for-bit
  CHECK(report_a.shuffle == report_b.shuffle);

  const auto [net_c, report_c] = train(samples, small_spec(), config, 12);
  CHECK(net_a.flat() != net_c.flat());
}

TEST_CASE("train rejects degenerate inputs") {
  TrainConfig config;
  CHECK_THROWS_AS(train({}, small_spec(), config, 1), std::invalid_argument);
  CHECK_THROWS_AS(train(constant_samples(3, 1.0), small_spec(), config, 1),
                  std::invalid_argument);  // fewer samples than folds
  TrainConfig bad;
  bad.folds = 1;
  CHECK_THROWS_AS(train(constant_samples(8, 1.0), small_spec(), bad, 1),
                  std::invalid_argument);
}
