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

#include "pubcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pubcast {

namespace {

// Normalized copies of the samples as column matrices.
struct Dataset {
  Eigen::MatrixXd windows;  // (window_length) x N
  Eigen::RowVectorXd targets;
};

Dataset assemble(const std::vector<WindowSample>& samples,
                 const std::vector<std::size_t>& index, double scale) {
  Dataset data;
  const Eigen::Index rows = samples.front().input.size();
  data.windows.resize(rows, static_cast<Eigen::Index>(index.size()));
  data.targets.resize(static_cast<Eigen::Index>(index.size()));
  for (std::size_t k = 0; k < index.size(); ++k) {
    const WindowSample& s = samples[index[k]];
    data.windows.col(static_cast<Eigen::Index>(k)) = s.input / scale;
    data.targets(static_cast<Eigen::Index>(k)) = s.target / scale;
  }
  return data;
}

double evaluate(const RecurrentNet<double>& net, const Dataset& data) {
  return mse_loss<double>(forward_batch(net, data.windows), data.targets);
}

void shuffle_in_place(std::vector<std::size_t>& order, RngStream& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(order[i - 1], order[j]);
  }
}

// One epoch of minibatch RMSprop over `order`; returns the mean of the
// per-batch losses seen before each update.
double run_epoch(RecurrentNet<double>& net, Eigen::VectorXd& opt_state,
                 const Dataset& data, std::vector<std::size_t>& order,
                 const TrainConfig& config, RngStream& rng) {
  shuffle_in_place(order, rng);
  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(config.batch_size)) {
    const std::size_t len =
        std::min<std::size_t>(config.batch_size, order.size() - start);
    Eigen::MatrixXd batch(data.windows.rows(), static_cast<Eigen::Index>(len));
    Eigen::RowVectorXd targets(static_cast<Eigen::Index>(len));
    for (std::size_t k = 0; k < len; ++k) {
      batch.col(static_cast<Eigen::Index>(k)) =
          data.windows.col(static_cast<Eigen::Index>(order[start + k]));
      targets(static_cast<Eigen::Index>(k)) =
          data.targets(static_cast<Eigen::Index>(order[start + k]));
    }
    loss_sum += mse_loss<double>(forward_batch(net, batch), targets);
    Eigen::VectorXd grads = gradients(net, batch, targets);
    rmsprop_step(net.flat(), grads, opt_state, config.learning_rate, config.rho,
                 config.epsilon);
    ++batches;
  }
  return loss_sum / static_cast<double>(batches);
}

}  // namespace

std::pair<RecurrentNet<double>, CvReport> train(
    const std::vector<WindowSample>& samples, const RecurrentSpec& spec,
    const TrainConfig& config, std::uint64_t seed) {
  if (!config.valid()) throw std::invalid_argument("invalid train config");
  if (samples.size() < static_cast<std::size_t>(config.folds)) {
    throw std::invalid_argument("need at least one sample per fold");
  }

  CvReport report;
  report.norm_scale = config.norm_scale;
  if (report.norm_scale == 0.0) {
    double top = 0.0;
    for (const WindowSample& s : samples) {
      top = std::max({top, s.target, s.input.maxCoeff()});
    }
    report.norm_scale = top > 0.0 ? top : 1.0;
  }

  // Seeded shuffle behind the fold packets, recorded for reproducibility.
  report.shuffle.resize(samples.size());
  std::iota(report.shuffle.begin(), report.shuffle.end(), std::size_t{0});
  {
    RngStream rng(seed, fnv1a64("cv-shuffle"));
    shuffle_in_place(report.shuffle, rng);
  }

  const std::uint64_t epoch_tag = fnv1a64("epoch-order");
  double best_epoch_sum = 0.0;
  double best_val_sum = 0.0;

  for (int fold = 0; fold < config.folds; ++fold) {
    const std::size_t lo = samples.size() * static_cast<std::size_t>(fold) /
                           static_cast<std::size_t>(config.folds);
    const std::size_t hi = samples.size() * static_cast<std::size_t>(fold + 1) /
                           static_cast<std::size_t>(config.folds);
    std::vector<std::size_t> val_index(report.shuffle.begin() + lo,
                                       report.shuffle.begin() + hi);
    std::vector<std::size_t> train_index;
    train_index.reserve(samples.size() - val_index.size());
    train_index.insert(train_index.end(), report.shuffle.begin(),
                       report.shuffle.begin() + lo);
    train_index.insert(train_index.end(), report.shuffle.begin() + hi,
                       report.shuffle.end());

    const Dataset train_data = assemble(samples, train_index, report.norm_scale);
    const Dataset val_data = assemble(samples, val_index, report.norm_scale);

    RecurrentNet<double> net =
        init_weights<double>(spec, RngStream(seed, fnv1a64("fold-init"),
                                             static_cast<std::uint64_t>(fold))
                                       .next_u64());
    // Warm-start the rectified head at the mean target; an all-negative
    // pre-activation batch would otherwise have a hard-zero gradient.
    net.dense_bias() = train_data.targets.mean();
    Eigen::VectorXd opt_state = Eigen::VectorXd::Zero(net.flat().size());
    std::vector<std::size_t> order(train_index.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    CvFold cv;
    cv.best_val_mse = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
      RngStream rng(seed, epoch_tag, static_cast<std::uint64_t>(fold),
                    static_cast<std::uint64_t>(epoch));
      cv.train_mse.push_back(run_epoch(net, opt_state, train_data, order, config, rng));
      const double val = evaluate(net, val_data);
      cv.val_mse.push_back(val);
      if (val < cv.best_val_mse) {
        cv.best_val_mse = val;
        cv.best_epoch = epoch;
      } else if (epoch - cv.best_epoch >= config.patience) {
        break;
      }
    }
    best_epoch_sum += cv.best_epoch;
    best_val_sum += cv.best_val_mse;
    report.folds.push_back(std::move(cv));
  }

  report.mean_val_mse = best_val_sum / config.folds;
  report.selected_epoch = std::max(
      1, static_cast<int>(std::lround(best_epoch_sum / config.folds)));

  // Retrain on the full sample set for the selected epoch budget.
  std::vector<std::size_t> all_index(samples.size());
  std::iota(all_index.begin(), all_index.end(), std::size_t{0});
  const Dataset full_data = assemble(samples, all_index, report.norm_scale);
  RecurrentNet<double> net = init_weights<double>(
      spec, RngStream(seed, fnv1a64("final-init")).next_u64());
  net.dense_bias() = full_data.targets.mean();
  Eigen::VectorXd opt_state = Eigen::VectorXd::Zero(net.flat().size());
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= report.selected_epoch; ++epoch) {
    RngStream rng(seed, epoch_tag, fnv1a64("final"),
                  static_cast<std::uint64_t>(epoch));
    run_epoch(net, opt_state, full_data, order, config, rng);
  }
  return {std::move(net), std::move(report)};
}

}  // namespace pubcast
