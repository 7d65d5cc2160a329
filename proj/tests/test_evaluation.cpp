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

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pubcast/evaluation.hpp"
#include "pubcast/rng.hpp"

using namespace pubcast;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("pearson: anchors, affine invariance, zero variance") {
  CHECK(*pearson(vec({1, 2, 3}), vec({1, 2, 3})) == doctest::Approx(1.0));
  CHECK(*pearson(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(-1.0));
  CHECK(*pearson(vec({1, 2, 4}), vec({2, 3, 9})) ==
        doctest::Approx(oracles::brute_force_pearson({1, 2, 4}, {2, 3, 9}))
            .epsilon(1e-12));
  CHECK(!pearson(vec({2, 2, 2}), vec({1, 2, 3})).has_value());

  RngStream rng(31);
  Eigen::VectorXd x(20), y(20);
  for (int i = 0; i < 20; ++i) {
    x[i] = rng.next_unit() * 10.0;
    y[i] = rng.next_unit() * 10.0;
  }
  const double r = *pearson(x, y);
  CHECK(*pearson((3.0 * x.array() + 7.0).matrix(), y) == doctest::Approx(r));
  CHECK(*pearson(x, (0.5 * y.array() - 2.0).matrix()) == doctest::Approx(r));
  CHECK(*pearson((-2.0 * x.array()).matrix(), y) == doctest::Approx(-r));
}

TEST_CASE("s1/s2: alignment versus sorted order") {
  const Eigen::VectorXd truth = vec({4, 1, 3, 2});
  const Eigen::VectorXd permuted = vec({1, 2, 4, 3});
  const auto [s1, s2] = s1_s2(truth, permuted);
  CHECK(*s2 == doctest::Approx(1.0));  // sorted lists identical
  CHECK(*s1 < 1.0);

  const auto [p1, p2] = s1_s2(truth, truth);
  CHECK(*p1 == doctest::Approx(1.0));
  CHECK(*p2 == doctest::Approx(1.0));

  // Random case against the definitional recomputation.
  RngStream rng(17);
  std::vector<double> a(50), b(50);
  Eigen::VectorXd va(50), vb(50);
  for (int i = 0; i < 50; ++i) {
    a[static_cast<std::size_t>(i)] = va[i] = std::floor(rng.next_unit() * 20.0);
    b[static_cast<std::size_t>(i)] = vb[i] = std::floor(rng.next_unit() * 20.0);
  }
  const auto [r1, r2] = s1_s2(va, vb);
  CHECK(*r1 == doctest::Approx(oracles::brute_force_pearson(a, b)).epsilon(1e-12));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(*r2 == doctest::Approx(oracles::brute_force_pearson(a, b)).epsilon(1e-12));

  // s2 is order-statistic based: shuffling either list leaves it fixed.
  Eigen::VectorXd shuffled = vb;
  for (Eigen::Index i = shuffled.size() - 1; i > 0; --i) {
    std::swap(shuffled[i], shuffled[static_cast<Eigen::Index>(
                               rng.next_u64() % static_cast<std::uint64_t>(i + 1))]);
  }
  const auto [q1, q2] = s1_s2(va, shuffled);
  CHECK(*q2 == doctest::Approx(*r2).epsilon(1e-15));
}

TEST_CASE("ks two-sample: anchors and brute-force oracle") {
  const std::vector<double> same = {1, 2, 3, 4, 5};
  const KsResult identical = ks_two_sample(same, same);
  CHECK(identical.statistic == 0.0);
  CHECK(identical.p_value > 0.999);

  const KsResult disjoint = ks_two_sample({1, 2, 3}, {10, 11, 12});
  CHECK(disjoint.statistic == 1.0);

  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {3, 4, 5, 6};
  const KsResult mixed = ks_two_sample(a, b);
  CHECK(mixed.statistic == doctest::Approx(oracles::brute_force_ks(a, b)).epsilon(1e-12));
  CHECK(mixed.statistic == doctest::Approx(0.5));

  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), std::invalid_argument);
}

TEST_CASE("ks statistic: symmetry and monotone-transform invariance") {
  RngStream rng(23);
  std::vector<double> a(80), b(120);
  for (auto& v : a) v = rng.next_unit() * 5.0;
  for (auto& v : b) v = rng.next_unit() * 5.0 + 0.5;
  const KsResult ab = ks_two_sample(a, b);
  const KsResult ba = ks_two_sample(b, a);
  CHECK(ab.statistic == doctest::Approx(ba.statistic).epsilon(1e-15));
  CHECK(ab.statistic == doctest::Approx(oracles::brute_force_ks(a, b)).epsilon(1e-12));

  auto squash = [](std::vector<double> v) {
    for (auto& x : v) x = std::exp(x);  // strictly increasing
    return v;
  };
  const KsResult transformed = ks_two_sample(squash(a), squash(b));
  CHECK(transformed.statistic == doctest::Approx(ab.statistic).epsilon(1e-15));
}

TEST_CASE("kolmogorov p-value matches independently computed anchors") {
  CHECK(kolmogorov_p(0.5) == doctest::Approx(0.9639452437).epsilon(1e-8));
  CHECK(kolmogorov_p(1.0) == doctest::Approx(0.2699996717).epsilon(1e-8));
  CHECK(kolmogorov_p(1.5) == doctest::Approx(0.0222179626).epsilon(1e-7));
  CHECK(kolmogorov_p(0.0) == 1.0);
  // Either side of the series switch at 1.18.
  CHECK(kolmogorov_p(1.1799) == doctest::Approx(0.1235120497).epsilon(1e-8));
  CHECK(kolmogorov_p(1.1801) == doctest::Approx(0.1233955916).epsilon(1e-8));
}

TEST_CASE("paper AUC: worked example and tie handling") {
  const AucCounts worked =
      auc_paper({true, true, false, false}, {0.9, 0.3, 0.2, 0.5});
  CHECK(worked.m1 == 1);
  CHECK(worked.m2 == 1);
  CHECK(worked.m3 == 1);
  CHECK(worked.value == 0.625);

  CHECK(auc_paper({true, false}, {1.0, 0.0}).value == 1.0);
  CHECK(auc_paper({true, false, true}, {0.5, 0.5, 0.5}).value == 0.5);

  // Order invariance and bounds on random inputs.
  RngStream rng(41);
  std::vector<bool> outcomes;
  std::vector<double> probs;
  for (int i = 0; i < 200; ++i) {
    outcomes.push_back(rng.next_u64() % 2 == 0);
    probs.push_back(rng.next_unit());
  }
  const AucCounts base = auc_paper(outcomes, probs);
  CHECK(base.value >= 0.0);
  CHECK(base.value <= 1.0);
  CHECK(base.m1 + base.m2 + base.m3 <= base.m);
  std::vector<bool> rev_outcomes(outcomes.rbegin(), outcomes.rend());
  std::vector<double> rev_probs(probs.rbegin(), probs.rend());
  CHECK(auc_paper(rev_outcomes, rev_probs).value == base.value);

  // The m3 class keys on the probability rounded to 6 decimals.
  CHECK(auc_paper({true}, {0.5000004}).m3 == 1);
  CHECK(auc_paper({true}, {0.500001}).m3 == 0);
}

namespace {

// A small synthetic evaluation set: authors at levels 1..3, two horizon
// years, perfect predictions.
std::vector<EvalSeries> perfect_series() {
  std::vector<EvalSeries> out;
  for (int i = 1; i <= 3; ++i) {
    for (int copy = 0; copy < 2; ++copy) {
      EvalSeries s;
      s.author_id = "a" + std::to_string(i) + std::to_string(copy);
      s.level = i;
      s.truth = {static_cast<double>(i + 1), static_cast<double>(i + 2)};
      s.predicted = s.truth;
      s.p_publish = {1.0, 1.0};
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("trend report: perfect forecasts collapse to the truth") {
  const auto series = perfect_series();
  const TrendReport report = trend_report(series, 2001, 2002, 15);
  for (const auto& [key, cell] : report.cells) {
    CHECK(cell.predicted_mean == doctest::Approx(cell.true_mean));
    CHECK(cell.authors == 2);
  }
  // Single author per level: the mean is the individual value.
  CHECK(report.cells.at({2, 2001}).true_mean == 3.0);
  for (const auto& [year, corr] : report.pooled) {
    CHECK(*corr.first == doctest::Approx(1.0));
    CHECK(*corr.second == doctest::Approx(1.0));
  }
}

TEST_CASE("trend report matches a brute-force group recount") {
  RngStream rng(53);
  std::vector<EvalSeries> series;
  for (int k = 0; k < 40; ++k) {
    EvalSeries s;
    s.author_id = "r" + std::to_string(k);
    s.level = 1 + static_cast<int>(rng.next_u64() % 4);
    const double t0 = static_cast<double>(s.level) + rng.next_unit();
    s.truth = {t0, t0 + rng.next_unit()};
    s.predicted = {t0 + rng.next_unit() - 0.5, t0 + rng.next_unit()};
    s.p_publish = {0.5, 0.5};
    series.push_back(std::move(s));
  }
  const TrendReport report = trend_report(series, 2001, 2002, 15);
  for (int level = 1; level <= 4; ++level) {
    double sum_true = 0.0, sum_pred = 0.0;
    std::size_t count = 0;
    for (const EvalSeries& s : series) {
      if (s.level != level) continue;
      sum_true += s.truth[1];
      sum_pred += s.predicted[1];
      ++count;
    }
    if (count == 0) continue;
    const TrendCell& cell = report.cells.at({level, 2002});
    CHECK(cell.authors == count);
    CHECK(cell.true_mean == doctest::Approx(sum_true / count).epsilon(1e-12));
    CHECK(cell.predicted_mean == doctest::Approx(sum_pred / count).epsilon(1e-12));
  }
}

TEST_CASE("distribution report: degenerate and shifted cases") {
  const auto series = perfect_series();
  const DistributionReport perfect = distribution_report(series, 2001, 2002);
  CHECK(perfect.ks.statistic == 0.0);
  CHECK(perfect.ks.p_value > 0.999);
  double total_true = 0.0, total_pred = 0.0;
  for (const auto& [count, freqs] : perfect.histogram) {
    CHECK(freqs.first == freqs.second);
    total_true += freqs.first;
    total_pred += freqs.second;
  }
  CHECK(total_true == doctest::Approx(1.0));
  CHECK(total_pred == doctest::Approx(1.0));

  // Shift every prediction by +5: D from the exhaustive ECDF oracle.
  auto shifted = series;
  std::vector<double> truth_sample, pred_sample;
  for (auto& s : shifted) {
    s.predicted[1] += 5.0;
    truth_sample.push_back(s.truth[1]);
    pred_sample.push_back(s.predicted[1]);
  }
  const DistributionReport dist = distribution_report(shifted, 2001, 2002);
  CHECK(dist.ks.statistic ==
        doctest::Approx(oracles::brute_force_ks(truth_sample, pred_sample))
            .epsilon(1e-12));
}

TEST_CASE("auc report groups by level and year") {
  std::vector<EvalSeries> series;
  for (int k = 0; k < 6; ++k) {
    EvalSeries s;
    s.author_id = "a" + std::to_string(k);
    s.level = 1 + (k % 2);
    const double t0 = static_cast<double>(s.level);
    const bool publishes = k < 3;
    s.truth = {t0 + (publishes ? 1.0 : 0.0), t0 + (publishes ? 2.0 : 0.0)};
    s.predicted = s.truth;
    s.p_publish = {publishes ? 0.9 : 0.1, publishes ? 0.8 : 0.2};
    series.push_back(std::move(s));
  }
  const auto cells = auc_report(series, 2001, 2002, 15, AucGrouping::kTrueLevel);
  REQUIRE(!cells.empty());
  for (const AucCell& cell : cells) {
    CHECK(cell.counts.value == 1.0);  // probabilities match outcomes exactly
    CHECK(cell.counts.m >= 1);
    CHECK(cell.year >= 2001);
    CHECK(cell.level >= 1);
  }
  std::size_t total = 0;
  for (const AucCell& cell : cells) total += cell.counts.m;
  CHECK(total == 12);  // 6 authors x 2 years
}
