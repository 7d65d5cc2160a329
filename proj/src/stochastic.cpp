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

#include "pubcast/stochastic.hpp"

#include <cmath>
#include <stdexcept>

namespace pubcast {

namespace {

void check_params(const PowerLawParams& params) {
  if (!params.valid()) {
    throw std::domain_error("power-law params require q > 0, beta1 > 0, beta2 >= 0");
  }
}

// Knuth's product-of-uniforms inversion; expected x+1 uniforms per draw.
std::int64_t poisson_small(double x, RngStream& rng) {
  const double limit = std::exp(-x);
  std::int64_t k = 0;
  double prod = rng.next_unit_open();
  while (prod > limit) {
    ++k;
    prod *= rng.next_unit_open();
  }
  return k;
}

// Transformed rejection with squeeze (Hoermann 1993, PTRS variant),
// valid for x >= 10; we switch at 30.
std::int64_t poisson_ptrs(double x, RngStream& rng) {
  const double slam = std::sqrt(x);
  const double loglam = std::log(x);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.next_unit() - 0.5;
    const double v = rng.next_unit_open();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + x + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::int64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -x + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

}  // namespace

double powerlaw_scale(double h, const PowerLawParams& params) {
  check_params(params);
  if (h < 0.0 || !std::isfinite(h)) {
    throw std::domain_error("power-law scale requires finite h >= 0");
  }
  if (h == 0.0) return 0.0;
  return params.beta1 * std::pow(h, params.beta2);
}

double powerlaw_inverse_cdf(double u, double h, const PowerLawParams& params) {
  return powerlaw_scale(h, params) * std::pow(u, 1.0 / params.q);
}

double powerlaw_sample(double h, const PowerLawParams& params, RngStream& rng) {
  return powerlaw_inverse_cdf(rng.next_unit_open(), h, params);
}

double powerlaw_cdf(double z, double h, const PowerLawParams& params) {
  const double scale = powerlaw_scale(h, params);
  if (z <= 0.0) return 0.0;
  if (z >= scale) return 1.0;
  return std::pow(z / scale, params.q);
}

std::int64_t poisson_sample(double x, RngStream& rng) {
  if (x < 0.0 || !std::isfinite(x)) {
    throw std::domain_error("Poisson mean must be finite and >= 0");
  }
  if (x == 0.0) return 0;
  if (x < 30.0) return poisson_small(x, rng);
  return poisson_ptrs(x, rng);
}

std::int64_t compound_increment(double h, const PowerLawParams& params,
                                RngStream& rng) {
  return poisson_sample(powerlaw_sample(h, params, rng), rng);
}

double prob_positive_increment(double h, const PowerLawParams& params,
                               std::int64_t rollouts, RngStream& rng) {
  if (rollouts < 1) {
    throw std::invalid_argument("rollout count must be >= 1");
  }
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < rollouts; ++r) {
    if (compound_increment(h, params, rng) >= 1) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rollouts);
}

}  // namespace pubcast
