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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "pubcast/recurrent.hpp"
#include "pubcast/training.hpp"

using namespace pubcast;

namespace {

// Straight-line reimplementation of both recurrences with plain loops and
// its own offset arithmetic; shares nothing with the Eigen path but the
// flat parameter layout contract.
double scalar_forward(const RecurrentNet<double>& net,
                      const std::vector<double>& window) {
  const int n = net.spec().hidden_units;
  const int gates = net.spec().gates();
  const int block = n * (1 + n + 1);  // input dim 1
  const double* p = net.flat().data();
  auto w_in = [&](int g, int i) { return p[g * block + i]; };
  auto u_rec = [&](int g, int i, int j) { return p[g * block + n + j * n + i]; };
  auto bias = [&](int g, int i) { return p[g * block + n + n * n + i]; };
  const double* dense = p + gates * block;

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> h(n, 0.0), c(n, 0.0);
  for (double x : window) {
    std::vector<double> pre(static_cast<std::size_t>(gates) * n);
    for (int g = 0; g < gates; ++g) {
      for (int i = 0; i < n; ++i) {
        double acc = w_in(g, i) * x + bias(g, i);
        for (int j = 0; j < n; ++j) acc += u_rec(g, i, j) * h[j];
        pre[static_cast<std::size_t>(g) * n + i] = acc;
      }
    }
    std::vector<double> h_new(n);
    if (net.spec().cell == CellKind::kLstm) {
      for (int i = 0; i < n; ++i) {
        const double gi = sig(pre[0 * n + i]);
        const double gf = sig(pre[1 * n + i]);
        const double gc = std::tanh(pre[2 * n + i]);
        const double go = sig(pre[3 * n + i]);
        c[i] = gf * c[i] + gi * gc;
        h_new[i] = go * std::tanh(c[i]);
      }
    } else {
      // The candidate pre-activation needs r*h, so recompute it here.
      for (int i = 0; i < n; ++i) {
        const double gz = sig(pre[0 * n + i]);
        double acc = w_in(2, i) * x + bias(2, i);
        for (int j = 0; j < n; ++j) {
          acc += u_rec(2, i, j) * (sig(pre[1 * n + j]) * h[j]);
        }
        const double hbar = std::tanh(acc);
        h_new[i] = gz * h[i] + (1.0 - gz) * hbar;
      }
    }
    h = h_new;
  }
  double out = dense[n];
  for (int i = 0; i < n; ++i) out += dense[i] * h[i];
  return std::max(0.0, out);
}

Eigen::MatrixXd random_windows(int length, int batch, std::uint64_t seed) {
  Eigen::MatrixXd windows(length, batch);
  RngStream rng(seed, fnv1a64("window"));
  for (int b = 0; b < batch; ++b) {
    double level = 0.0;
    for (int t = 0; t < length; ++t) {
      level += rng.next_unit();
      windows(t, b) = level;
    }
  }
  return windows;
}

}  // namespace

TEST_CASE("parameter counts match the paper's architectures") {
  RecurrentSpec lstm;  // 32 units, scalar input
  CHECK(param_count(lstm) == 4385);
  RecurrentSpec gru = lstm;
  gru.cell = CellKind::kGru;
  CHECK(param_count(gru) == 3297);
  RecurrentSpec tiny;
  tiny.hidden_units = 1;
  CHECK(param_count(tiny) == 14);  // 4*3 + 2

  // The formula equals the number of allocated scalars for any (n, m).
  for (int n : {1, 3, 8}) {
    for (int m : {1, 2, 5}) {
      for (CellKind cell : {CellKind::kLstm, CellKind::kGru}) {
        RecurrentSpec spec;
        spec.cell = cell;
        spec.hidden_units = n;
        spec.input_dim = m;
        CHECK(RecurrentNet<double>(spec).flat().size() == param_count(spec));
      }
    }
  }
}

TEST_CASE("init_weights: deterministic, bounded, forget-gate bias") {
  RecurrentSpec spec;
  const auto a = init_weights<double>(spec, 7);
  const auto b = init_weights<double>(spec, 7);
  CHECK(a.flat() == b.flat());
  const auto c = init_weights<double>(spec, 8);
  CHECK(a.flat() != c.flat());

  const int n = spec.hidden_units;
  for (int g = 0; g < 4; ++g) {
    CHECK(a.input_kernel(g).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / (1 + n)));
    CHECK(a.recurrent_kernel(g).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / (2 * n)));
  }
  CHECK(a.dense_weight().cwiseAbs().maxCoeff() <= std::sqrt(6.0 / (n + 1)));
  CHECK(a.bias(lstm_gate::kForget).minCoeff() == 1.0);
  CHECK(a.bias(lstm_gate::kForget).maxCoeff() == 1.0);
  CHECK(a.bias(lstm_gate::kInput).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.dense_bias() == kDenseBiasInit);  // keeps the rectified head live

  RecurrentSpec gru;
  gru.cell = CellKind::kGru;
  const auto g = init_weights<double>(gru, 7);
  for (int k = 0; k < 3; ++k) CHECK(g.bias(k).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward: zero weights pass the dense bias through the rectifier") {
  for (CellKind cell : {CellKind::kLstm, CellKind::kGru}) {
    RecurrentSpec spec;
    spec.cell = cell;
    spec.hidden_units = 4;
    spec.window_length = 5;
    RecurrentNet<double> net(spec);
    Eigen::VectorXd window(5);
    window << 0, 1, 2, 3, 4;
    CHECK(forward(net, window) == 0.0);
    net.dense_bias() = 0.75;
    CHECK(forward(net, window) == 0.75);
    net.dense_bias() = -0.75;
    CHECK(forward(net, window) == 0.0);

    // Pure function: identical on re-evaluation.
    net = init_weights<double>(spec, 3);
    CHECK(forward(net, window) == forward(net, window));
    CHECK(forward(net, window) >= 0.0);

    Eigen::VectorXd bad = window;
    bad[2] = std::nan("");
    CHECK_THROWS_AS(forward(net, bad), std::invalid_argument);
  }
}

TEST_CASE("forward output is non-negative for any weights and window") {
  RngStream rng(61, fnv1a64("nonneg"));
  for (int trial = 0; trial < 20; ++trial) {
    RecurrentSpec spec;
    spec.cell = trial % 2 == 0 ? CellKind::kLstm : CellKind::kGru;
    spec.hidden_units = 3 + static_cast<int>(rng.next_u64() % 6);
    spec.window_length = 4 + static_cast<int>(rng.next_u64() % 8);
    RecurrentNet<double> net = init_weights<double>(spec, rng.next_u64());
    // Perturb every coordinate, including strongly negative biases.
    for (Eigen::Index i = 0; i < net.flat().size(); ++i) {
      net.flat()[i] += 4.0 * rng.next_unit() - 2.0;
    }
    Eigen::VectorXd window(spec.window_length);
    for (int t = 0; t < spec.window_length; ++t) {
      window[t] = 10.0 * rng.next_unit() - 5.0;
    }
    CHECK(forward(net, window) >= 0.0);
  }
}

TEST_CASE("forward agrees with an independent scalar reimplementation") {
  for (CellKind cell : {CellKind::kLstm, CellKind::kGru}) {
    RecurrentSpec spec;
    spec.cell = cell;
    spec.hidden_units = 6;
    spec.window_length = 9;
    const auto net = init_weights<double>(spec, 21);
    RngStream rng(4, fnv1a64("dual"));
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> window(9);
      Eigen::VectorXd eigen_window(9);
      double level = 0.0;
      for (int t = 0; t < 9; ++t) {
        level += 2.0 * rng.next_unit();
        window[static_cast<std::size_t>(t)] = level;
        eigen_window[t] = level;
      }
      CHECK(forward(net, eigen_window) ==
            doctest::Approx(scalar_forward(net, window)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mse loss") {
  Eigen::RowVectorXd pred(2), target(2);
  pred << 1, 3;
  target << 1, 1;
  CHECK(mse_loss<double>(pred, target) == 2.0);
  CHECK(mse_loss<double>(target, target) == 0.0);
  RngStream rng(5);
  for (int i = 0; i < 20; ++i) {
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Random(4);
    Eigen::RowVectorXd b = Eigen::RowVectorXd::Random(4);
    CHECK(mse_loss<double>(a, b) >= 0.0);
  }
}

TEST_CASE("gradients match central finite differences") {
  for (CellKind cell : {CellKind::kLstm, CellKind::kGru}) {
    RecurrentSpec spec;
    spec.cell = cell;
    const auto net = init_weights<double>(spec, 13);
    const Eigen::MatrixXd windows = random_windows(12, 5, 31);
    Eigen::RowVectorXd targets(5);
    targets << 3.0, 1.5, 7.0, 2.0, 5.5;

    RngStream pick(77, fnv1a64(to_string(cell)));
    std::vector<int> coords;
    for (int k = 0; k < 10; ++k) {
      coords.push_back(static_cast<int>(pick.next_u64() %
                                        static_cast<std::uint64_t>(net.flat().size())));
    }
    CHECK(gradient_check(net, windows, targets,
                         std::span<const int>(coords.data(), coords.size()),
                         1e-5) < 1e-4);
  }
}

TEST_CASE("gradient of a perfect fit is zero at the dense head") {
  RecurrentSpec spec;
  spec.hidden_units = 4;
  spec.window_length = 6;
  RecurrentNet<double> net(spec);  // zero weights, h stays 0
  net.dense_bias() = 2.5;          // ReLU active, prediction == 2.5 exactly
  Eigen::MatrixXd windows = random_windows(6, 3, 8);
  Eigen::RowVectorXd targets = Eigen::RowVectorXd::Constant(3, 2.5);
  const Eigen::VectorXd grads = gradients(net, windows, targets);
  CHECK(grads.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient of a duplicated batch equals the single-batch gradient") {
  RecurrentSpec spec;
  spec.hidden_units = 5;
  spec.window_length = 7;
  const auto net = init_weights<double>(spec, 17);
  const Eigen::MatrixXd windows = random_windows(7, 4, 19);
  Eigen::RowVectorXd targets(4);
  targets << 1, 2, 3, 4;

  Eigen::MatrixXd doubled(7, 8);
  doubled << windows, windows;
  Eigen::RowVectorXd doubled_targets(8);
  doubled_targets << targets, targets;

  const Eigen::VectorXd once = gradients(net, windows, targets);
  const Eigen::VectorXd twice = gradients(net, doubled, doubled_targets);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rmsprop update rule") {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 1.0);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(1);
  rmsprop_step(w, g, state, 1e-3, 0.9, 1e-8);
  CHECK(w[0] == 1.0);  // zero gradient, no movement

  // First step with g = 1: 0.001 / sqrt(0.1 + 1e-8).
  g[0] = 1.0;
  rmsprop_step(w, g, state, 1e-3, 0.9, 1e-8);
  CHECK(1.0 - w[0] == doctest::Approx(0.00316227750205451).epsilon(1e-10));

  // The accumulator converges to g^2, so |step| approaches lr.
  for (int i = 0; i < 2000; ++i) {
    const double before = w[0];
    rmsprop_step(w, g, state, 1e-3, 0.9, 1e-8);
    if (i > 1900) CHECK(before - w[0] == doctest::Approx(1e-3).epsilon(1e-6));
  }
}

TEST_CASE("checkpoint round trip and rejection") {
  RecurrentSpec spec;
  spec.cell = CellKind::kGru;
  const auto net = init_weights<double>(spec, 23);
  const std::string path =
      (std::filesystem::temp_directory_path() / "pubcast_ckpt_test.bin").string();
  save_checkpoint(path, net, 37.5);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.norm_scale == 37.5);
  CHECK(loaded.net.spec().cell == CellKind::kGru);
  CHECK(loaded.net.spec().hidden_units == 32);
  CHECK(loaded.net.flat() == net.flat());

  const std::string bogus =
      (std::filesystem::temp_directory_path() / "pubcast_ckpt_bogus.bin").string();
  {
    std::ofstream out(bogus, std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(bogus), InputError);
  std::filesystem::remove(path);
  std::filesystem::remove(bogus);
}
