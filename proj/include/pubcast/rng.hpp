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

#ifndef PUBCAST_RNG_HPP_
#define PUBCAST_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace pubcast {

// SplitMix64 finalizer (Steele, Lea & Flood 2014, via Vigna's public-domain
// implementation). Used both as the stream mixer and the per-draw generator.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over bytes. std::hash is not stable across platforms; this is.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Splittable counter-based stream. The initial state is a hash of
// (master_seed, k1, k2, k3), so identical keys give identical draw
// sequences no matter which order streams are consumed in.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t k1 = 0,
                     std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    std::uint64_t s = mix64(master_seed + 0x9e3779b97f4a7c15ULL);
    s = mix64(s ^ mix64(k1 + 0x9e3779b97f4a7c15ULL));
    s = mix64(s ^ mix64(k2 + 0x2545f4914f6cdd1dULL));
    s = mix64(s ^ mix64(k3 + 0x6a09e667f3bcc909ULL));
    state_ = s;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]. Zero is excluded so inverse-CDF transforms that
  // take logs or fractional powers never see a spurious atom at 0.
  double next_unit_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Derived stream for a sub-computation; does not disturb this stream.
  RngStream split(std::uint64_t k) const { return RngStream(state_, k); }

 private:
  std::uint64_t state_;
};

}  // namespace pubcast

#endif  // PUBCAST_RNG_HPP_
