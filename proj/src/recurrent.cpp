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

#include "pubcast/recurrent.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pubcast/corpus.hpp"  // InputError

namespace pubcast {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'W', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_checkpoint(const std::string& path, const RecurrentNet<double>& net,
                     double norm_scale) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, net.spec().cell == CellKind::kLstm ? 0 : 1);
  put_u32(out, static_cast<std::uint32_t>(net.spec().hidden_units));
  put_u32(out, static_cast<std::uint32_t>(net.spec().input_dim));
  put_u32(out, static_cast<std::uint32_t>(net.spec().window_length));
  put_f64(out, norm_scale);
  put_u64(out, static_cast<std::uint64_t>(net.flat().size()));
  for (Eigen::Index i = 0; i < net.flat().size(); ++i) put_f64(out, net.flat()[i]);
  if (!out) throw InputError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw InputError("not a checkpoint file: " + path);
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version));
  }
  RecurrentSpec spec;
  spec.cell = get_u32(in) == 0 ? CellKind::kLstm : CellKind::kGru;
  spec.hidden_units = static_cast<int>(get_u32(in));
  spec.input_dim = static_cast<int>(get_u32(in));
  spec.window_length = static_cast<int>(get_u32(in));
  Checkpoint ckpt;
  ckpt.norm_scale = get_f64(in);
  const std::uint64_t count = get_u64(in);
  if (!in || count != static_cast<std::uint64_t>(param_count(spec))) {
    throw InputError("checkpoint parameter count mismatch: " + path);
  }
  ckpt.net = RecurrentNet<double>(spec);
  for (std::uint64_t i = 0; i < count; ++i) {
    ckpt.net.flat()[static_cast<Eigen::Index>(i)] = get_f64(in);
  }
  if (!in) throw InputError("truncated checkpoint: " + path);
  if (!ckpt.net.flat().allFinite() || !std::isfinite(ckpt.norm_scale) ||
      ckpt.norm_scale <= 0.0) {
    throw InputError("checkpoint holds non-finite values: " + path);
  }
  return ckpt;
}

}  // namespace pubcast
