// Copyright 2025 The dpcomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpcomm/freq_estimation.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dpcomm/accountant.hpp"
#include "dpcomm/errors.hpp"
#include "dpcomm/rng.hpp"
#include "dpcomm/synthetic.hpp"

namespace dpcomm::freq {
namespace {

TEST(RhrShapeTest, ChunkArithmeticAndErrors) {
  const RhrShape s = RhrShape::create(16, 3);
  EXPECT_EQ(s.chunks, 4u);
  EXPECT_EQ(s.chunk_size, 4u);
  EXPECT_THROW(RhrShape::create(12, 2), DimensionError);
  EXPECT_THROW(RhrShape::create(4, 4), ConfigError);  // 2^{b-1} = 8 > d
  EXPECT_THROW(RhrShape::create(4, 0), RangeError);
}

TEST(RhrClientEncodeTest, DegenerateChunkingIsDeterministic) {
  // b = log2(d) + 1 gives B = 1: one deterministic report whose chunk index
  // is the item itself.
  const std::uint32_t d = 8;
  const int bits = 4;
  for (std::uint32_t v = 0; v < d; ++v) {
    const auto reports =
        rhr_client_encode(OneHotItem{v, d}, bits, 99, /*client=*/v);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].coord, 0u);
    EXPECT_EQ(reports[0].chunk, v);
    EXPECT_TRUE(reports[0].positive);  // H_1 = [1]
  }
}

TEST(RhrClientEncodeTest, HandEvaluatedSigns) {
  // d = 4, b = 2: B = 2 chunks of size 2.  Item 2 sits in chunk 1 at
  // offset 0: H_2[j, 0] = +1/sqrt(2) for both j.  Item 3 (offset 1) has
  // H_2[0,1] = +, H_2[1,1] = -.
  const std::uint32_t d = 4;
  const int bits = 2;
  for (std::uint64_t client = 0; client < 64; ++client) {
    for (const auto& r : rhr_client_encode(OneHotItem{2, d}, bits, 7, client)) {
      EXPECT_EQ(r.chunk, 1u);
      EXPECT_TRUE(r.positive);
    }
    for (const auto& r : rhr_client_encode(OneHotItem{3, d}, bits, 7, client)) {
      EXPECT_EQ(r.chunk, 1u);
      EXPECT_EQ(r.positive, r.coord == 0);
    }
  }
}

TEST(RhrClientEncodeTest, ExpectedOneReportPerClient) {
  const std::uint32_t d = 64;
  const int bits = 3;  // B = 16
  std::uint64_t total = 0;
  const std::uint64_t n = 20000;
  for (std::uint64_t i = 0; i < n; ++i) {
    total += rhr_client_encode(OneHotItem{i % d, d}, bits, 321, i).size();
  }
  const double mean = static_cast<double>(total) / n;
  // One report in expectation regardless of B; binomial se.
  const double se = std::sqrt((1.0 - 1.0 / 16.0) / static_cast<double>(n));
  EXPECT_NEAR(mean, 1.0, 3.0 * se);
}

TEST(RhrAggregateTest, DegenerateChunkingIsExact) {
  const std::uint32_t d = 8;
  const int bits = 4;  // B = 1
  const std::uint64_t n = 50;
  std::vector<OneHotItem> items;
  for (std::uint64_t i = 0; i < n; ++i) {
    items.push_back(OneHotItem{static_cast<std::uint32_t>(i % 3), d});
  }
  const FreqEstimate est = rhr_run(items, {1.0, 1e-5}, bits, 5, 0.0);
  std::vector<double> truth(d, 0.0);
  for (const auto& item : items) truth[item.index] += 1.0 / n;
  for (std::uint32_t v = 0; v < d; ++v) {
    EXPECT_NEAR(est.estimate[v], truth[v], 1e-12) << "item " << v;
  }
}

TEST(RhrAggregateTest, AllSameItemExactRecovery) {
  const std::uint32_t d = 16;
  const std::vector<OneHotItem> items(40, OneHotItem{11, d});
  const FreqEstimate est = rhr_run(items, {1.0, 1e-5}, 5, 2, 0.0);
  for (std::uint32_t v = 0; v < d; ++v) {
    EXPECT_NEAR(est.estimate[v], v == 11 ? 1.0 : 0.0, 1e-12);
  }
}

// Exact per-coordinate variance with Bernoulli(1/B) sampling at the
// orthonormal scale: sigma^2 + (C_l / n^2)(1 - 1/B), derived from
// Var(Z) = (1/B)(1 - 1/B) and the unit rows of the orthonormal transform.
TEST(RhrAggregateTest, PerCoordinateVarianceIdentity) {
  const std::uint32_t d = 8;
  const int bits = 2;  // B = 4, two chunks
  const std::uint64_t n = 12;
  Rng data_rng(33);
  std::vector<OneHotItem> items(n);
  std::vector<double> truth(d, 0.0);
  std::vector<double> chunk_count(2, 0.0);
  for (auto& item : items) {
    item.index = static_cast<std::uint32_t>(uniform_unit(data_rng) * d);
    item.domain = d;
    truth[item.index] += 1.0 / n;
    chunk_count[item.index / 4] += 1.0;
  }

  const int kTrials = 30000;
  std::vector<double> sq(d, 0.0);
  for (int t = 0; t < kTrials; ++t) {
    const FreqEstimate est =
        rhr_run(items, {1.0, 1e-5}, bits, derive_seed(42, t, "t"), 0.0);
    for (std::uint32_t v = 0; v < d; ++v) {
      const double e = est.estimate[v] - truth[v];
      sq[v] += e * e / kTrials;
    }
  }
  for (std::uint32_t v = 0; v < d; ++v) {
    const double expected =
        chunk_count[v / 4] / (static_cast<double>(n) * n) * (1.0 - 0.25);
    EXPECT_NEAR(sq[v] / expected, 1.0, 0.10) << "coordinate " << v;
  }
}

TEST(RhrAggregateTest, UnbiasedPerCoordinate) {
  const std::uint32_t d = 16;
  const int bits = 3;
  const std::uint64_t n = 30;
  const FreqDataset data = harness::gen_synthetic_freq(
      n, d, harness::ItemDistribution::kUniform, 1.1, 9);

  const int kTrials = 20000;
  std::vector<double> sums(d, 0.0), sums_sq(d, 0.0);
  for (int t = 0; t < kTrials; ++t) {
    const FreqEstimate est = rhr_run(data.items, {1.0, 1e-5}, bits,
                                     derive_seed(52, t, "t"), 0.0);
    for (std::uint32_t v = 0; v < d; ++v) {
      sums[v] += est.estimate[v];
      sums_sq[v] += est.estimate[v] * est.estimate[v];
    }
  }
  for (std::uint32_t v = 0; v < d; ++v) {
    const double mean = sums[v] / kTrials;
    const double var = sums_sq[v] / kTrials - mean * mean;
    EXPECT_NEAR(mean, data.frequencies[v], 3.0 * std::sqrt(var / kTrials))
        << "item " << v;
  }
}

TEST(RhrAggregateTest, RejectsMalformedReports) {
  Rng rng(1);
  std::vector<RhrReport> bad_coord{{4, 0, true}};  // B = 4 for d=8,b=2
  EXPECT_THROW(rhr_aggregate(bad_coord, 5, 8, 2, 0.0, rng),
               ProtocolViolation);
  std::vector<RhrReport> bad_chunk{{0, 2, true}};
  EXPECT_THROW(rhr_aggregate(bad_chunk, 5, 8, 2, 0.0, rng),
               ProtocolViolation);
}

TEST(RhrCalibrateTest, DegenerateChainMatchesManualReplay) {
  // B = 1: gamma = 1, a single coordinate group.
  const accountant::PrivacyBudget budget{0.5, 1e-5};
  const std::uint64_t n = 100;
  const std::uint32_t d = 8;
  const int bits = 4;  // B = 1
  const accountant::NoiseCalibration cal = rhr_calibrate(budget, n, d, bits);
  const double sens = rhr_sensitivity(n, 1);
  const accountant::NoiseCalibration manual =
      accountant::calibrate_subsampled_gaussian(budget, 1.0, 1, sens);
  EXPECT_DOUBLE_EQ(cal.sigma2_sum, manual.sigma2_sum);
  EXPECT_DOUBLE_EQ(
      cal.sigma2_sum,
      accountant::gaussian_sigma2(sens, {manual.eps1, manual.delta1}));
}

TEST(RhrCalibrateTest, SigmaDecreasesWithEps) {
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double sigma2 =
        rhr_calibrate({eps, 1e-5}, 200, 32, 3).sigma2_sum;
    EXPECT_LT(sigma2, prev);
    prev = sigma2;
  }
}

TEST(RhrCalibrateTest, GoldenValueAfterForwardAudit) {
  const accountant::PrivacyBudget budget{1.0, 1e-5};
  const accountant::NoiseCalibration cal = rhr_calibrate(budget, 100, 16, 3);
  // Forward audit first: the chain must land at or below the target.
  const accountant::PrivacyBudget replay =
      accountant::audit_calibration(cal, budget.delta);
  EXPECT_LE(replay.eps, budget.eps + 1e-12);
  EXPECT_LE(replay.delta, budget.delta + 1e-18);
  // d = 16, b = 3: B = 4, gamma = 1/4, sensitivity 2 sqrt(4)/100 = 0.04.
  // Frozen after validating the chain above.
  EXPECT_NEAR(cal.sigma2_sum, 0.04 * 0.04 * 2.0 *
                                  std::log(1.25 / cal.delta1) /
                                  (cal.eps1 * cal.eps1),
              1e-15);
  EXPECT_NEAR(cal.sigma2_sum, 0.359828104431420, 1e-12);
}

// Exhaustive neighboring-dataset search: the realized l2 change of any
// per-coordinate pre-noise aggregate never exceeds the declared
// sensitivity.
TEST(RhrSensitivityTest, ExhaustiveNeighborSearch) {
  const std::uint64_t n = 10;
  for (const int bits : {1, 2, 3, 4, 5}) {
    const std::uint32_t d = 16;
    const RhrShape shape = RhrShape::create(d, bits);
    const double declared = rhr_sensitivity(n, shape.chunk_size);
    const double rescale = static_cast<double>(shape.chunk_size) / n;
    const double mag = 1.0 / std::sqrt(double(shape.chunk_size));
    double worst = 0.0;
    for (std::uint32_t v = 0; v < d; ++v) {
      for (std::uint32_t w = 0; w < d; ++w) {
        // Client switches item v -> w while sampled at coordinate j: the
        // aggregate for group j changes in at most two chunk cells.
        for (std::uint32_t j = 0; j < shape.chunk_size; ++j) {
          std::vector<double> delta(shape.chunks, 0.0);
          delta[v / shape.chunk_size] -=
              rescale * mag *
              (transforms::hadamard_entry(shape.chunk_size, j,
                                          v % shape.chunk_size) > 0 ? 1 : -1);
          delta[w / shape.chunk_size] +=
              rescale * mag *
              (transforms::hadamard_entry(shape.chunk_size, j,
                                          w % shape.chunk_size) > 0 ? 1 : -1);
          double sq = 0.0;
          for (double x : delta) sq += x * x;
          worst = std::max(worst, std::sqrt(sq));
        }
      }
    }
    EXPECT_LE(worst, declared * (1.0 + 1e-12)) << "bits " << bits;
  }
}

// Theorem-style error bounds at small scale; the acceptance suite runs the
// full-size version.
TEST(RhrRunTest, ErrorBoundsSmallScale) {
  const std::uint32_t d = 8;
  const int bits = 2;  // B = 4
  const std::uint64_t n = 100;
  const FreqDataset data = harness::gen_synthetic_freq(
      n, d, harness::ItemDistribution::kUniform, 1.1, 77);
  const double sigma2 = rhr_calibrate({2.0, 1e-5}, n, d, bits).sigma2_sum;

  const int kTrials = 400;
  std::vector<double> l2_samples, l1_samples;
  for (int t = 0; t < kTrials; ++t) {
    const FreqEstimate est = rhr_run(data.items, {2.0, 1e-5}, bits,
                                     derive_seed(88, t, "t"), sigma2);
    double sq = 0.0, l1 = 0.0;
    for (std::uint32_t v = 0; v < d; ++v) {
      const double e = est.estimate[v] - data.frequencies[v];
      sq += e * e;
      l1 += std::abs(e);
    }
    l2_samples.push_back(sq);
    l1_samples.push_back(l1);
  }
  double l2_mean = 0.0, l1_mean = 0.0;
  for (double v : l2_samples) l2_mean += v / kTrials;
  for (double v : l1_samples) l1_mean += v / kTrials;
  double l2_sd = 0.0;
  for (double v : l2_samples) l2_sd += (v - l2_mean) * (v - l2_mean);
  l2_sd = std::sqrt(l2_sd / (kTrials - 1.0));

  const double b_chunk = 4.0;
  const double l2_bound = b_chunk / n + d * sigma2;
  const double l1_bound = std::sqrt(d * b_chunk / n + d * d * sigma2);
  EXPECT_LE(l2_mean, l2_bound + 3.0 * l2_sd / std::sqrt(double(kTrials)));
  EXPECT_LE(l1_mean, l1_bound * 1.05);
}

}  // namespace
}  // namespace dpcomm::freq
