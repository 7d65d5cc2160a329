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

#ifndef PUBCAST_TRAINING_HPP_
#define PUBCAST_TRAINING_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pubcast/corpus.hpp"
#include "pubcast/recurrent.hpp"

namespace pubcast {

struct TrainConfig {
  int batch_size = 5;
  int folds = 4;
  double learning_rate = 1e-3;
  double rho = 0.9;          // RMSprop decay
  double epsilon = 1e-8;
  int max_epochs = 500;
  int patience = 20;         // epochs without validation improvement
  double norm_scale = 0.0;   // 0 = use max cumulative count of the split

  bool valid() const {
    return batch_size >= 1 && folds >= 2 && learning_rate > 0.0 && rho > 0.0 &&
           rho < 1.0 && epsilon > 0.0 && max_epochs >= 1 && patience >= 1 &&
           norm_scale >= 0.0;
  }
};

// state <- rho*state + (1-rho)*g^2;  w <- w - lr * g / sqrt(state + eps).
inline void rmsprop_step(Eigen::VectorXd& weights, const Eigen::VectorXd& grads,
                         Eigen::VectorXd& state, double lr, double rho,
                         double eps) {
  state = rho * state + (1.0 - rho) * grads.cwiseAbs2();
  weights.array() -= lr * grads.array() / (state.array() + eps).sqrt();
}

struct CvFold {
  std::vector<double> train_mse;  // one entry per epoch run
  std::vector<double> val_mse;
  int best_epoch = 0;             // 1-based epoch of the minimum val MSE
  double best_val_mse = 0.0;
};

struct CvReport {
  std::vector<CvFold> folds;
  std::vector<std::size_t> shuffle;  // seeded sample order behind the packets
  double mean_val_mse = 0.0;         // arithmetic mean of the fold minima
  int selected_epoch = 0;            // rounded mean of per-fold best epochs
  double norm_scale = 1.0;
};

// Fourfold (or k-fold) cross validation picks an epoch budget, then the
// network is retrained on the whole sample set for that many epochs.
// Deterministic for a fixed (samples, spec, config, seed): fold packets,
// per-epoch batch order, and weight initialization all come from keyed
// streams, and batches are consumed in a fixed sequential order.
std::pair<RecurrentNet<double>, CvReport> train(
    const std::vector<WindowSample>& samples, const RecurrentSpec& spec,
    const TrainConfig& config, std::uint64_t seed);

}  // namespace pubcast

#endif  // PUBCAST_TRAINING_HPP_
