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

#ifndef PUBCAST_STOCHASTIC_HPP_
#define PUBCAST_STOCHASTIC_HPP_

#include <cstdint>

#include "pubcast/rng.hpp"

namespace pubcast {

// Bounded power law on [0, beta1 * h^beta2] with shape q:
//   f(z) = q / scale^q * z^(q-1),  CDF(z) = (z / scale)^q.
// The scale grows with the author's cumulative count h.
struct PowerLawParams {
  double q = 0.1;
  double beta1 = 0.33;
  double beta2 = 1.22;

  bool valid() const { return q > 0.0 && beta1 > 0.0 && beta2 >= 0.0; }
};

// beta1 * h^beta2. Throws std::domain_error for h < 0 or invalid params.
double powerlaw_scale(double h, const PowerLawParams& params);

// Quantile function: scale * u^(1/q) for u in (0, 1].
double powerlaw_inverse_cdf(double u, double h, const PowerLawParams& params);

// Inverse-CDF draw; always lies in [0, scale], and is 0 when h = 0.
double powerlaw_sample(double h, const PowerLawParams& params, RngStream& rng);

// 0 for z <= 0, (z/scale)^q in between, 1 for z >= scale.
double powerlaw_cdf(double z, double h, const PowerLawParams& params);

// Poisson(x) draw. Exponential-product inversion for small x, the
// transformed-rejection method (Hoermann 1993) for large x, so iterated
// rollouts with large cumulative counts stay O(1) per draw.
std::int64_t poisson_sample(double x, RngStream& rng);

// One annual publication increment: y ~ Pois(x), x ~ power law at h.
std::int64_t compound_increment(double h, const PowerLawParams& params,
                                RngStream& rng);

// Monte Carlo frequency of a positive increment over `rollouts` draws.
// Converges to 1 - E[exp(-x)] as rollouts grows.
double prob_positive_increment(double h, const PowerLawParams& params,
                               std::int64_t rollouts, RngStream& rng);

}  // namespace pubcast

#endif  // PUBCAST_STOCHASTIC_HPP_
