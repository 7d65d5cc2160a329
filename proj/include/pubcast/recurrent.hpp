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
// Gated recurrent cells (LSTM and classic GRU) with a scalar dense head,
// implemented directly on Eigen dense types. Parameters live in one flat
// vector so the optimizer, the checkpoint format, and finite-difference
// probing all see the same coordinates.
//
// Flat parameter order, for a cell with n hidden units and m input dims:
//   for each gate g (LSTM: input, forget, candidate, output;
//                    GRU: update, reset, candidate):
//     input kernel W_g   (n x m, column-major)
//     recurrent kernel U_g (n x n, column-major)
//     bias b_g           (n)
//   dense head weight    (n)
//   dense head bias      (1)

#ifndef PUBCAST_RECURRENT_HPP_
#define PUBCAST_RECURRENT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pubcast/rng.hpp"

namespace pubcast {

enum class CellKind { kLstm, kGru };

inline std::string to_string(CellKind cell) {
  return cell == CellKind::kLstm ? "lstm" : "gru";
}

struct RecurrentSpec {
  CellKind cell = CellKind::kLstm;
  int hidden_units = 32;
  int input_dim = 1;
  int window_length = 12;

  bool valid() const {
    return hidden_units >= 1 && input_dim >= 1 && window_length >= 1;
  }
  int gates() const { return cell == CellKind::kLstm ? 4 : 3; }
};

// Gates x n x (n + m + 1) cell parameters plus the (n + 1) dense head.
inline int param_count(const RecurrentSpec& spec) {
  const int n = spec.hidden_units;
  const int m = spec.input_dim;
  return spec.gates() * n * (n + m + 1) + n + 1;
}

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return ((-x).exp() + typename Derived::Scalar(1)).inverse();
}

template <typename Scalar>
class RecurrentNet {
 public:
  RecurrentNet() = default;
  explicit RecurrentNet(const RecurrentSpec& spec)
      : spec_(spec), flat_(VectorX<Scalar>::Zero(param_count(spec))) {
    if (!spec.valid()) throw std::invalid_argument("invalid recurrent spec");
  }

  const RecurrentSpec& spec() const { return spec_; }
  VectorX<Scalar>& flat() { return flat_; }
  const VectorX<Scalar>& flat() const { return flat_; }

  using MatMap = Eigen::Map<MatrixX<Scalar>>;
  using VecMap = Eigen::Map<VectorX<Scalar>>;
  using ConstMatMap = Eigen::Map<const MatrixX<Scalar>>;
  using ConstVecMap = Eigen::Map<const VectorX<Scalar>>;

  MatMap input_kernel(int gate) {
    return MatMap(flat_.data() + gate_offset(gate), n(), m());
  }
  ConstMatMap input_kernel(int gate) const {
    return ConstMatMap(flat_.data() + gate_offset(gate), n(), m());
  }
  MatMap recurrent_kernel(int gate) {
    return MatMap(flat_.data() + gate_offset(gate) + n() * m(), n(), n());
  }
  ConstMatMap recurrent_kernel(int gate) const {
    return ConstMatMap(flat_.data() + gate_offset(gate) + n() * m(), n(), n());
  }
  VecMap bias(int gate) {
    return VecMap(flat_.data() + gate_offset(gate) + n() * (m() + n()), n());
  }
  ConstVecMap bias(int gate) const {
    return ConstVecMap(flat_.data() + gate_offset(gate) + n() * (m() + n()), n());
  }
  VecMap dense_weight() { return VecMap(flat_.data() + dense_offset(), n()); }
  ConstVecMap dense_weight() const {
    return ConstVecMap(flat_.data() + dense_offset(), n());
  }
  Scalar& dense_bias() { return flat_[dense_offset() + n()]; }
  Scalar dense_bias() const { return flat_[dense_offset() + n()]; }

 private:
  int n() const { return spec_.hidden_units; }
  int m() const { return spec_.input_dim; }
  Eigen::Index gate_offset(int gate) const {
    return static_cast<Eigen::Index>(gate) * n() * (m() + n() + 1);
  }
  Eigen::Index dense_offset() const { return gate_offset(spec_.gates()); }

  RecurrentSpec spec_;
  VectorX<Scalar> flat_;
};

// Gate indices into the flat layout.
namespace lstm_gate {
inline constexpr int kInput = 0;
inline constexpr int kForget = 1;
inline constexpr int kCandidate = 2;
inline constexpr int kOutput = 3;
}  // namespace lstm_gate
namespace gru_gate {
inline constexpr int kUpdate = 0;
inline constexpr int kReset = 1;
inline constexpr int kCandidate = 2;
}  // namespace gru_gate

// Glorot-uniform kernels, zero gate biases except the LSTM forget gate
// (1). The dense-head bias starts at a small positive value: with the
// rectified scalar output, a batch whose pre-activations are all negative
// at initialization has an exactly zero gradient and can never move.
inline constexpr double kDenseBiasInit = 0.1;

template <typename Scalar>
RecurrentNet<Scalar> init_weights(const RecurrentSpec& spec, std::uint64_t seed) {
  RecurrentNet<Scalar> net(spec);
  RngStream rng(seed, fnv1a64("init"), static_cast<std::uint64_t>(spec.cell));
  const int n = spec.hidden_units;
  const int m = spec.input_dim;
  auto fill_uniform = [&rng](auto block, double bound) {
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) {
        block(i, j) = static_cast<Scalar>((2.0 * rng.next_unit() - 1.0) * bound);
      }
    }
  };
  for (int g = 0; g < spec.gates(); ++g) {
    fill_uniform(net.input_kernel(g), std::sqrt(6.0 / (m + n)));
    fill_uniform(net.recurrent_kernel(g), std::sqrt(6.0 / (n + n)));
  }
  fill_uniform(net.dense_weight(), std::sqrt(6.0 / (n + 1)));
  if (spec.cell == CellKind::kLstm) {
    net.bias(lstm_gate::kForget).setConstant(Scalar(1));
  }
  net.dense_bias() = Scalar(kDenseBiasInit);
  return net;
}

// Per-step activations kept for backpropagation through time.
template <typename Scalar>
struct ForwardCache {
  struct Step {
    MatrixX<Scalar> h_prev, c_prev;
    std::array<MatrixX<Scalar>, 4> act;  // LSTM: i,f,g,o; GRU: z,r,hbar,(r.h_prev)
    MatrixX<Scalar> c, tanh_c;
  };
  std::vector<Step> steps;
  MatrixX<Scalar> h_final;
  RowVectorX<Scalar> pre_out;
  RowVectorX<Scalar> pred;
};

// Batched forward pass. `windows` is (window_length * input_dim) x batch;
// step t occupies rows [t*m, (t+1)*m). Output is relu(dense(h_K)) per
// column, so predictions are never negative.
template <typename Scalar>
RowVectorX<Scalar> forward_batch(const RecurrentNet<Scalar>& net,
                                 const MatrixX<Scalar>& windows,
                                 ForwardCache<Scalar>* cache = nullptr) {
  const RecurrentSpec& spec = net.spec();
  const int n = spec.hidden_units;
  const int m = spec.input_dim;
  const Eigen::Index batch = windows.cols();
  if (windows.rows() != static_cast<Eigen::Index>(spec.window_length) * m) {
    throw std::invalid_argument("window rows do not match spec");
  }
  if (!windows.allFinite()) {
    throw std::invalid_argument("non-finite input window");
  }

  MatrixX<Scalar> h = MatrixX<Scalar>::Zero(n, batch);
  MatrixX<Scalar> c = MatrixX<Scalar>::Zero(n, batch);
  if (cache) cache->steps.resize(static_cast<std::size_t>(spec.window_length));

  for (int t = 0; t < spec.window_length; ++t) {
    const auto x_t = windows.middleRows(static_cast<Eigen::Index>(t) * m, m);
    auto pre = [&](int gate) -> MatrixX<Scalar> {
      return ((net.input_kernel(gate) * x_t + net.recurrent_kernel(gate) * h).colwise() +
              net.bias(gate));
    };
    if (spec.cell == CellKind::kLstm) {
      MatrixX<Scalar> gi = sigmoid(pre(lstm_gate::kInput).array()).matrix();
      MatrixX<Scalar> gf = sigmoid(pre(lstm_gate::kForget).array()).matrix();
      MatrixX<Scalar> gc = pre(lstm_gate::kCandidate).array().tanh().matrix();
      MatrixX<Scalar> go = sigmoid(pre(lstm_gate::kOutput).array()).matrix();
      MatrixX<Scalar> c_new =
          (gf.array() * c.array() + gi.array() * gc.array()).matrix();
      MatrixX<Scalar> tanh_c = c_new.array().tanh().matrix();
      MatrixX<Scalar> h_new = (go.array() * tanh_c.array()).matrix();
      if (cache) {
        auto& step = cache->steps[static_cast<std::size_t>(t)];
        step.h_prev = h;
        step.c_prev = c;
        step.act = {gi, gf, gc, go};
        step.c = c_new;
        step.tanh_c = tanh_c;
      }
      c = std::move(c_new);
      h = std::move(h_new);
    } else {
      MatrixX<Scalar> gz = sigmoid(pre(gru_gate::kUpdate).array()).matrix();
      MatrixX<Scalar> gr = sigmoid(pre(gru_gate::kReset).array()).matrix();
      MatrixX<Scalar> rh = (gr.array() * h.array()).matrix();
      MatrixX<Scalar> hbar =
          ((net.input_kernel(gru_gate::kCandidate) * x_t +
            net.recurrent_kernel(gru_gate::kCandidate) * rh)
               .colwise() +
           net.bias(gru_gate::kCandidate))
              .array()
              .tanh()
              .matrix();
      MatrixX<Scalar> h_new =
          (gz.array() * h.array() + (Scalar(1) - gz.array()) * hbar.array())
              .matrix();
      if (cache) {
        auto& step = cache->steps[static_cast<std::size_t>(t)];
        step.h_prev = h;
        step.act = {gz, gr, hbar, rh};
      }
      h = std::move(h_new);
    }
  }

  RowVectorX<Scalar> pre_out =
      ((net.dense_weight().transpose() * h).array() + net.dense_bias()).matrix();
  RowVectorX<Scalar> pred = pre_out.cwiseMax(Scalar(0));
  if (cache) {
    cache->h_final = h;
    cache->pre_out = pre_out;
    cache->pred = pred;
  }
  return pred;
}

template <typename Scalar>
Scalar forward(const RecurrentNet<Scalar>& net, const VectorX<Scalar>& window) {
  MatrixX<Scalar> batch = window;
  return forward_batch(net, batch)(0);
}

// Mean squared error over a batch.
template <typename Scalar>
Scalar mse_loss(const RowVectorX<Scalar>& pred, const RowVectorX<Scalar>& target) {
  if (pred.size() != target.size() || pred.size() == 0) {
    throw std::invalid_argument("loss needs equal-sized, non-empty batches");
  }
  return (pred - target).squaredNorm() / static_cast<Scalar>(pred.size());
}

// Exact gradient of the batch-mean squared error with respect to every
// parameter, by backpropagation through time. Same flat layout as the
// weights.
template <typename Scalar>
VectorX<Scalar> gradients(const RecurrentNet<Scalar>& net,
                          const MatrixX<Scalar>& windows,
                          const RowVectorX<Scalar>& targets) {
  const RecurrentSpec& spec = net.spec();
  const int n = spec.hidden_units;
  const int m = spec.input_dim;
  const Eigen::Index batch = windows.cols();
  if (batch == 0) throw std::invalid_argument("gradients need a non-empty batch");
  if (targets.size() != batch) throw std::invalid_argument("target size mismatch");

  ForwardCache<Scalar> cache;
  forward_batch(net, windows, &cache);

  RecurrentNet<Scalar> grad(spec);  // zero-initialized accumulator

  // Dense head with rectifier.
  RowVectorX<Scalar> dpred =
      (cache.pred - targets) * (Scalar(2) / static_cast<Scalar>(batch));
  RowVectorX<Scalar> dpre_out =
      ((cache.pre_out.array() > Scalar(0)).template cast<Scalar>() * dpred.array())
          .matrix();
  grad.dense_weight() = cache.h_final * dpre_out.transpose();
  grad.dense_bias() = dpre_out.sum();

  MatrixX<Scalar> dh = net.dense_weight() * dpre_out;
  MatrixX<Scalar> dc = MatrixX<Scalar>::Zero(n, batch);

  for (int t = spec.window_length - 1; t >= 0; --t) {
    const auto& step = cache.steps[static_cast<std::size_t>(t)];
    const auto x_t = windows.middleRows(static_cast<Eigen::Index>(t) * m, m);
    auto accumulate = [&](int gate, const MatrixX<Scalar>& dpre,
                          const MatrixX<Scalar>& rec_input) {
      grad.input_kernel(gate) += dpre * x_t.transpose();
      grad.recurrent_kernel(gate) += dpre * rec_input.transpose();
      grad.bias(gate) += dpre.rowwise().sum();
    };
    if (spec.cell == CellKind::kLstm) {
      const auto& [gi, gf, gc, go] = step.act;
      MatrixX<Scalar> dpre_o = (dh.array() * step.tanh_c.array() * go.array() *
                                (Scalar(1) - go.array()))
                                   .matrix();
      dc.array() +=
          dh.array() * go.array() * (Scalar(1) - step.tanh_c.array().square());
      MatrixX<Scalar> dpre_i =
          (dc.array() * gc.array() * gi.array() * (Scalar(1) - gi.array())).matrix();
      MatrixX<Scalar> dpre_g =
          (dc.array() * gi.array() * (Scalar(1) - gc.array().square())).matrix();
      MatrixX<Scalar> dpre_f = (dc.array() * step.c_prev.array() * gf.array() *
                                (Scalar(1) - gf.array()))
                                   .matrix();
      accumulate(lstm_gate::kInput, dpre_i, step.h_prev);
      accumulate(lstm_gate::kForget, dpre_f, step.h_prev);
      accumulate(lstm_gate::kCandidate, dpre_g, step.h_prev);
      accumulate(lstm_gate::kOutput, dpre_o, step.h_prev);
      dh = net.recurrent_kernel(lstm_gate::kInput).transpose() * dpre_i +
           net.recurrent_kernel(lstm_gate::kForget).transpose() * dpre_f +
           net.recurrent_kernel(lstm_gate::kCandidate).transpose() * dpre_g +
           net.recurrent_kernel(lstm_gate::kOutput).transpose() * dpre_o;
      dc = (dc.array() * gf.array()).matrix();
    } else {
      const auto& [gz, gr, hbar, rh] = step.act;
      MatrixX<Scalar> dz = (dh.array() * (step.h_prev.array() - hbar.array())).matrix();
      MatrixX<Scalar> dpre_z =
          (dz.array() * gz.array() * (Scalar(1) - gz.array())).matrix();
      MatrixX<Scalar> dhbar = (dh.array() * (Scalar(1) - gz.array())).matrix();
      MatrixX<Scalar> dpre_h =
          (dhbar.array() * (Scalar(1) - hbar.array().square())).matrix();
      MatrixX<Scalar> drh =
          net.recurrent_kernel(gru_gate::kCandidate).transpose() * dpre_h;
      MatrixX<Scalar> dpre_r = (drh.array() * step.h_prev.array() * gr.array() *
                                (Scalar(1) - gr.array()))
                                   .matrix();
      accumulate(gru_gate::kUpdate, dpre_z, step.h_prev);
      accumulate(gru_gate::kReset, dpre_r, step.h_prev);
      accumulate(gru_gate::kCandidate, dpre_h, rh);
      dh = (dh.array() * gz.array() + drh.array() * gr.array()).matrix() +
           net.recurrent_kernel(gru_gate::kUpdate).transpose() * dpre_z +
           net.recurrent_kernel(gru_gate::kReset).transpose() * dpre_r;
    }
  }
  return grad.flat();
}

// Largest relative disagreement between the analytic gradient and a
// central finite difference over the given flat coordinates.
template <typename Scalar>
double gradient_check(const RecurrentNet<Scalar>& net,
                      const MatrixX<Scalar>& windows,
                      const RowVectorX<Scalar>& targets,
                      std::span<const int> coords, double step) {
  const VectorX<Scalar> analytic = gradients(net, windows, targets);
  RecurrentNet<Scalar> probe = net;
  double worst = 0.0;
  for (int idx : coords) {
    const Scalar saved = probe.flat()[idx];
    probe.flat()[idx] = saved + static_cast<Scalar>(step);
    const Scalar up = mse_loss(forward_batch(probe, windows), targets);
    probe.flat()[idx] = saved - static_cast<Scalar>(step);
    const Scalar down = mse_loss(forward_batch(probe, windows), targets);
    probe.flat()[idx] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double denom =
        std::max({std::abs(fd), std::abs(static_cast<double>(analytic[idx])), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic[idx]) / denom);
  }
  return worst;
}

// Checkpoint file: little-endian binary, versioned header
// (magic, version, cell, n, m, window, normalization scale, count),
// then the flat parameter vector as 64-bit floats.
void save_checkpoint(const std::string& path, const RecurrentNet<double>& net,
                     double norm_scale);
struct Checkpoint {
  RecurrentNet<double> net;
  double norm_scale = 1.0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pubcast

#endif  // PUBCAST_RECURRENT_HPP_
