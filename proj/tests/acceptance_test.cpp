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

// End-to-end acceptance suite.  Each test covers one numbered criterion and
// prints a single [ACCEPT] pass/fail line with the measured quantities.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dpcomm/accountant.hpp"
#include "dpcomm/errors.hpp"
#include "dpcomm/experiment.hpp"
#include "dpcomm/freq_estimation.hpp"
#include "dpcomm/fwht.hpp"
#include "dpcomm/kashin.hpp"
#include "dpcomm/mean_estimation.hpp"
#include "dpcomm/rng.hpp"
#include "dpcomm/sign_vector.hpp"
#include "dpcomm/sqkr.hpp"
#include "dpcomm/synthetic.hpp"
#include "test_oracles.hpp"

namespace dpcomm {
namespace {

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[ACCEPT] criterion %d: %s  (%s)\n", criterion,
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  EXPECT_TRUE(pass) << "criterion " << criterion << ": " << detail;
}

TEST(Acceptance, Criterion1TransformCorrectness) {
  Rng rng(101);
  double worst_oracle = 0.0;
  double worst_involution = 0.0;
  for (std::size_t b = 1; b <= 1024; b <<= 1) {
    std::vector<double> v(b);
    for (double& x : v) x = standard_normal(rng);
    const std::vector<double> fast = transforms::fwht(v);
    const std::vector<double> dense = testing::dense_hadamard_multiply(v);
    for (std::size_t j = 0; j < b; ++j) {
      worst_oracle = std::max(worst_oracle, std::abs(fast[j] - dense[j]));
    }
    const std::vector<double> twice = transforms::fwht(fast);
    for (std::size_t j = 0; j < b; ++j) {
      worst_involution =
          std::max(worst_involution, std::abs(twice[j] - v[j]));
    }
  }
  report(1, worst_oracle <= 1e-12 && worst_involution <= 1e-10,
         "max |fwht - dense| = " + std::to_string(worst_oracle) +
             ", max involution error = " + std::to_string(worst_involution));
}

TEST(Acceptance, Criterion2KashinContract) {
  Rng rng(202);
  bool pass = true;
  std::string detail;
  for (const std::uint32_t d : {8u, 64u, 512u}) {
    const transforms::KashinFrame frame(d, 4000 + d);
    double worst_recon = 0.0;
    double worst_level = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> x(d);
      for (double& v : x) v = standard_normal(rng);
      const double norm = transforms::l2_norm(x);
      for (double& v : x) v /= norm;
      const std::vector<double> xt = transforms::kashin_encode(x, 1.0, frame);
      const std::vector<double> back = transforms::kashin_decode(xt, frame);
      double err = 0.0;
      for (std::uint32_t j = 0; j < d; ++j) {
        err += (back[j] - x[j]) * (back[j] - x[j]);
      }
      worst_recon = std::max(worst_recon, std::sqrt(err));
      worst_level = std::max(
          worst_level, std::sqrt(static_cast<double>(frame.frame_dim())) *
                           transforms::linf_norm(xt));
    }
    pass = pass && worst_recon <= 1e-6 && worst_level <= frame.level();
    detail += "d=" + std::to_string(d) +
              ": recon=" + std::to_string(worst_recon) +
              " sqrt(D)*linf=" + std::to_string(worst_level) + "  ";
  }
  report(2, pass, detail);
}

TEST(Acceptance, Criterion3CsgmVarianceIdentity) {
  const std::uint64_t n = 20;
  const std::uint32_t d = 16;
  const auto xs = harness::gen_synthetic_mean(n, d, 303);
  const double c = 1.0 / std::sqrt(static_cast<double>(d));
  const auto signs = harness::to_sign_vectors(xs, c);
  const int kTrials = 100000;

  bool pass = true;
  std::string detail;
  for (const double gamma : {0.25, 0.5, 1.0}) {
    mean::CsgmConfig cfg{n, d, gamma, {1.0, 1e-5}, c, 0};
    // Closed form: sum_j (1/n^2)(1/gamma - 1) sum_i x_i(j)^2 with
    // x_i(j)^2 = c^2 everywhere.
    const double closed = (1.0 / gamma - 1.0) * d * n * c * c /
                          (static_cast<double>(n) * n);
    // The truth vector, computed with the aggregator's own scaling so the
    // gamma = 1 case is exactly zero.
    std::vector<double> truth(d, 0.0);
    for (const auto& s : signs) {
      for (std::uint32_t j = 0; j < d; ++j) truth[j] += s.entry(j);
    }
    for (double& v : truth) v *= 1.0 / static_cast<double>(n);

    double mse = 0.0;
    for (int t = 0; t < kTrials; ++t) {
      cfg.shared_seed = derive_seed(909 + static_cast<int>(gamma * 8), t, "t");
      const mean::MeanEstimate est =
          mean::csgm_run(signs, cfg, 0, accountant::NoiseCalibration::none());
      for (std::uint32_t j = 0; j < d; ++j) {
        const double e = est.estimate[j] - truth[j];
        mse += e * e / kTrials;
      }
    }
    if (gamma == 1.0) {
      pass = pass && mse == 0.0;
      detail += "gamma=1: mse=" + std::to_string(mse) + " (exact)  ";
    } else {
      pass = pass && std::abs(mse / closed - 1.0) <= 0.02;
      detail += "gamma=" + std::to_string(gamma) +
                ": mse/closed=" + std::to_string(mse / closed) + "  ";
    }
  }
  report(3, pass, detail);
}

struct MeanCheck {
  bool pass = true;
  double worst_z = 0.0;

  void add(const std::vector<double>& sums, const std::vector<double>& sums_sq,
           const std::vector<double>& truth, int trials, std::size_t dims) {
    for (std::size_t j = 0; j < dims; ++j) {
      const double mean = sums[j] / trials;
      const double var = sums_sq[j] / trials - mean * mean;
      const double se = std::sqrt(var / trials);
      const double z = se > 0.0 ? std::abs(mean - truth[j]) / se
                                : std::abs(mean - truth[j]);
      worst_z = std::max(worst_z, z);
      pass = pass && z <= 3.0;
    }
  }
};

TEST(Acceptance, Criterion4UnbiasednessSuite) {
  const int kTrials = 100000;
  MeanCheck check;
  std::string detail;

  {  // CSGM, noiseless, gamma = 0.5.
    const std::uint64_t n = 50;
    const std::uint32_t d = 16;
    const auto xs = harness::gen_synthetic_mean(n, d, 41);
    const double c = 1.0 / std::sqrt(static_cast<double>(d));
    const auto signs = harness::to_sign_vectors(xs, c);
    std::vector<double> truth(d, 0.0);
    for (const auto& x : xs) {
      for (std::uint32_t j = 0; j < d; ++j) truth[j] += x[j] / n;
    }
    mean::CsgmConfig cfg{n, d, 0.5, {1.0, 1e-5}, c, 0};
    std::vector<double> sums(d, 0.0), sums_sq(d, 0.0);
    for (int t = 0; t < kTrials; ++t) {
      cfg.shared_seed = derive_seed(4001, t, "t");
      const mean::MeanEstimate est =
          mean::csgm_run(signs, cfg, 0, accountant::NoiseCalibration::none());
      for (std::uint32_t j = 0; j < d; ++j) {
        sums[j] += est.estimate[j];
        sums_sq[j] += est.estimate[j] * est.estimate[j];
      }
    }
    check.add(sums, sums_sq, truth, kTrials, d);
    detail += "csgm z=" + std::to_string(check.worst_z) + "  ";
  }

  {  // Coordinate pre-selection, noiseless.
    const std::uint64_t n = 40;
    const std::uint32_t d = 16;
    const auto xs = harness::gen_synthetic_mean(n, d, 43);
    const double c = 1.0 / std::sqrt(static_cast<double>(d));
    const auto signs = harness::to_sign_vectors(xs, c);
    std::vector<double> truth(d, 0.0);
    for (const auto& x : xs) {
      for (std::uint32_t j = 0; j < d; ++j) truth[j] += x[j] / n;
    }
    std::vector<double> sums(d, 0.0), sums_sq(d, 0.0);
    for (int t = 0; t < kTrials; ++t) {
      const mean::MeanEstimate est = mean::csgm_preselect_run_with(
          signs, 6, 1.0, {1.0, 1e-5},
          mean::PreselectSeeds::derive(derive_seed(4003, t, "t")),
          accountant::NoiseCalibration::none());
      for (std::uint32_t j = 0; j < d; ++j) {
        sums[j] += est.estimate[j];
        sums_sq[j] += est.estimate[j] * est.estimate[j];
      }
    }
    check.add(sums, sums_sq, truth, kTrials, d);
    detail += "preselect z=" + std::to_string(check.worst_z) + "  ";
  }

  {  // Full l2 pipeline, noiseless.
    const std::uint64_t n = 20;
    const std::uint32_t d = 16;
    const transforms::KashinFrame frame(d, 45);
    const auto xs = harness::gen_synthetic_mean(n, d, 47);
    std::vector<double> truth(d, 0.0);
    for (const auto& x : xs) {
      for (std::uint32_t j = 0; j < d; ++j) truth[j] += x[j] / n;
    }
    std::vector<double> sums(d, 0.0), sums_sq(d, 0.0);
    for (int t = 0; t < kTrials; ++t) {
      const mean::MeanEstimate est = mean::l2_mean_pipeline(
          xs, 1.0, 8.0, {1.0, 1e-5}, frame,
          mean::PipelineSeeds::derive(derive_seed(4005, t, "t")),
          accountant::NoiseCalibration::none());
      for (std::uint32_t j = 0; j < d; ++j) {
        sums[j] += est.estimate[j];
        sums_sq[j] += est.estimate[j] * est.estimate[j];
      }
    }
    check.add(sums, sums_sq, truth, kTrials, d);
    detail += "l2 z=" + std::to_string(check.worst_z) + "  ";
  }

  {  // RHR, noiseless.
    const std::uint64_t n = 50;
    const std::uint32_t d = 16;
    const harness::FreqDataset data = harness::gen_synthetic_freq(
        n, d, harness::ItemDistribution::kUniform, 1.1, 49);
    std::vector<double> sums(d, 0.0), sums_sq(d, 0.0);
    for (int t = 0; t < kTrials; ++t) {
      const freq::FreqEstimate est = freq::rhr_run(
          data.items, {1.0, 1e-5}, 3, derive_seed(4007, t, "t"), 0.0);
      for (std::uint32_t j = 0; j < d; ++j) {
        sums[j] += est.estimate[j];
        sums_sq[j] += est.estimate[j] * est.estimate[j];
      }
    }
    check.add(sums, sums_sq, data.frequencies, kTrials, d);
    detail += "rhr z=" + std::to_string(check.worst_z) + "  ";
  }

  {  // Shuffled SQKR, T = 2.
    const std::uint64_t n = 20;
    const std::uint32_t d = 8;
    const transforms::KashinFrame frame(d, 51);
    const auto xs = harness::gen_synthetic_mean(n, d, 53);
    std::vector<double> truth(d, 0.0);
    for (const auto& x : xs) {
      for (std::uint32_t j = 0; j < d; ++j) truth[j] += x[j] / n;
    }
    shuffle::ShufflePlan plan;
    plan.rounds = 2;
    plan.b0 = 1;
    plan.eps0 = 1.0;
    std::vector<double> sums(d, 0.0), sums_sq(d, 0.0);
    for (int t = 0; t < kTrials; ++t) {
      const mean::MeanEstimate est = shuffle::shuffled_sqkr_run(
          xs, 1.0, plan, frame,
          shuffle::ShuffleSeeds::derive(derive_seed(4009, t, "t")));
      for (std::uint32_t j = 0; j < d; ++j) {
        sums[j] += est.estimate[j];
        sums_sq[j] += est.estimate[j] * est.estimate[j];
      }
    }
    check.add(sums, sums_sq, truth, kTrials, d);
    detail += "sqkr z=" + std::to_string(check.worst_z);
  }

  report(4, check.pass, "worst per-coordinate |z|: " + detail);
}

TEST(Acceptance, Criterion5AccountantAudit) {
  Rng rng(505);
  bool pass = true;
  int audited = 0;
  double worst_margin = -1e300;
  for (int i = 0; i < 100; ++i) {
    const accountant::PrivacyBudget target{
        0.05 + 5.0 * uniform_unit(rng),
        std::pow(10.0, -3.0 - 5.0 * uniform_unit(rng))};
    const double gamma = 0.02 + 0.98 * uniform_unit(rng);
    const std::uint64_t coords =
        1 + static_cast<std::uint64_t>(uniform_unit(rng) * 1000);
    const double sensitivity = 0.05 + 2.0 * uniform_unit(rng);
    accountant::NoiseCalibration cal;
    try {
      cal = accountant::calibrate_subsampled_gaussian(target, gamma, coords,
                                                      sensitivity);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++audited;
    const accountant::PrivacyBudget replay =
        accountant::audit_calibration(cal, target.delta);
    worst_margin = std::max(worst_margin, replay.eps - target.eps);
    pass = pass && replay.eps <= target.eps + 1e-12 &&
           replay.delta <= target.delta + 1e-18;
  }
  // Poisson amplification at gamma = 1 is the identity.
  for (const double eps : {0.1, 0.7, 2.0}) {
    const accountant::PrivacyBudget out =
        accountant::amplify_poisson(eps, 1e-6, 1.0);
    pass = pass && std::abs(out.eps - eps) <= 1e-12 &&
           std::abs(out.delta - 1e-6) <= 1e-18;
  }
  report(5, pass && audited >= 80,
         std::to_string(audited) + " tuples audited, worst eps margin " +
             std::to_string(worst_margin));
}

TEST(Acceptance, Criterion6SqkrDebiasOracle) {
  const std::uint32_t d = 4;
  const double c = 1.0;
  const double eps0 = std::log(3.0);
  double worst_bias = 0.0;
  double worst_ratio = 0.0;

  for (int b0 = 1; b0 <= 2; ++b0) {
    const std::uint64_t n_strings = 1ull << b0;
    const std::uint64_t n_tuples =
        static_cast<std::uint64_t>(std::pow(4.0, b0) + 0.5);
    const double p_true = std::exp(eps0) / (std::exp(eps0) + n_strings - 1.0);
    const double p_other = (1.0 - p_true) / (n_strings - 1.0);
    for (std::uint32_t pattern = 0; pattern < 16; ++pattern) {
      transforms::SignVector x(d, c);
      for (std::uint32_t j = 0; j < d; ++j) x.bits[j] = (pattern >> j) & 1u;
      std::vector<double> expectation(d, 0.0);
      for (std::uint64_t tuple = 0; tuple < n_tuples; ++tuple) {
        shuffle::SqkrReport r;
        r.coords.resize(b0);
        std::uint64_t rem = tuple;
        std::uint64_t truth = 0;
        for (int j = 0; j < b0; ++j) {
          r.coords[j] = static_cast<std::uint32_t>(rem % d);
          rem /= d;
        }
        for (int j = 0; j < b0; ++j) {
          truth = (truth << 1) | (x.bits[r.coords[j]] ? 1u : 0u);
        }
        for (std::uint64_t y = 0; y < n_strings; ++y) {
          const double prob = std::pow(1.0 / d, b0) *
                              (y == truth ? p_true : p_other);
          r.signs.assign(b0, false);
          for (int j = 0; j < b0; ++j) {
            r.signs[j] = ((y >> (b0 - 1 - j)) & 1u) != 0;
          }
          const std::vector<shuffle::SqkrReport> reports{r};
          const std::vector<double> est =
              shuffle::sqkr_estimate(reports, eps0, b0, 1, d, c);
          for (std::uint32_t v = 0; v < d; ++v) {
            expectation[v] += prob * est[v];
          }
        }
      }
      for (std::uint32_t v = 0; v < d; ++v) {
        worst_bias = std::max(worst_bias,
                              std::abs(expectation[v] - x.entry(v)));
      }
    }
  }

  // Exhaustive likelihood ratio over all inputs, coordinate tuples, and
  // outputs for b0 <= 3.
  for (int b0 = 1; b0 <= 3; ++b0) {
    const std::uint64_t n_strings = 1ull << b0;
    const double p_true = std::exp(eps0) / (std::exp(eps0) + n_strings - 1.0);
    const double p_other = (1.0 - p_true) / (n_strings - 1.0);
    const std::uint64_t n_tuples =
        static_cast<std::uint64_t>(std::pow(4.0, b0) + 0.5);
    for (std::uint64_t tuple = 0; tuple < n_tuples; ++tuple) {
      std::vector<std::uint32_t> coords(b0);
      std::uint64_t rem = tuple;
      for (int j = 0; j < b0; ++j) {
        coords[j] = static_cast<std::uint32_t>(rem % d);
        rem /= d;
      }
      for (std::uint64_t y = 0; y < n_strings; ++y) {
        double lo = 1e300, hi = 0.0;
        for (std::uint32_t pattern = 0; pattern < 16; ++pattern) {
          std::uint64_t truth = 0;
          for (int j = 0; j < b0; ++j) {
            truth = (truth << 1) | ((pattern >> coords[j]) & 1u);
          }
          const double p = y == truth ? p_true : p_other;
          lo = std::min(lo, p);
          hi = std::max(hi, p);
        }
        worst_ratio = std::max(worst_ratio, hi / lo);
      }
    }
  }

  const bool pass =
      worst_bias <= 1e-12 && worst_ratio <= std::exp(eps0) * (1.0 + 1e-12);
  report(6, pass,
         "worst bias " + std::to_string(worst_bias) + ", worst LR " +
             std::to_string(worst_ratio) + " vs e^eps0 = " +
             std::to_string(std::exp(eps0)));
}

TEST(Acceptance, Criterion7CommunicationAccounting) {
  bool pass = true;
  std::string detail;

  {  // CSGM: mean bits per client within 1% of gamma * d over 1e4 clients.
    const std::uint64_t n = 10000;
    const std::uint32_t d = 500;
    const double gamma = 0.2;
    const auto xs = harness::gen_synthetic_mean(1, d, 61);
    const auto signs = harness::to_sign_vectors(xs, 1.0 / std::sqrt(500.0));
    mean::CsgmConfig cfg{n, d, gamma, {1.0, 1e-5}, signs[0].magnitude, 7171};
    std::uint64_t bits = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      bits += mean::csgm_client_encode(signs[0], i, cfg).coords.size();
    }
    const double mean_bits = static_cast<double>(bits) / n;
    pass = pass && std::abs(mean_bits / (gamma * d) - 1.0) <= 0.01;
    detail += "csgm bits/client " + std::to_string(mean_bits) + " vs " +
              std::to_string(gamma * d) + "  ";
  }

  {  // RHR: mean messages per client within 1% of 1.
    const std::uint64_t n = 10000;
    const std::uint32_t d = 16;
    const int bits = 2;  // B = 8
    std::uint64_t messages = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      messages += freq::rhr_client_encode(
                      freq::OneHotItem{static_cast<std::uint32_t>(i % d), d},
                      bits, 7373, i)
                      .size();
    }
    const double mean_msgs = static_cast<double>(messages) / n;
    pass = pass && std::abs(mean_msgs - 1.0) <= 0.01;
    detail += "rhr messages/client " + std::to_string(mean_msgs) + "  ";
  }

  {  // Shuffled SQKR: exact bit count, never exceeding the budget.
    const std::uint32_t d = 16;
    const transforms::KashinFrame frame(d, 63);
    const auto xs = harness::gen_synthetic_mean(40, d, 65);
    const accountant::PrivacyBudget target{1.0, 1e-5};
    const double bit_budget = 25.0;
    const shuffle::ShufflePlan plan = shuffle::plan_shuffled_sqkr(
        target, bit_budget, frame.frame_dim(), 40);
    const mean::MeanEstimate est = shuffle::shuffled_sqkr_run(
        xs, 1.0, plan, frame, shuffle::ShuffleSeeds::derive(67));
    const std::uint64_t per_client =
        plan.bits_per_client(frame.frame_dim());
    const std::uint64_t expected_exact =
        static_cast<std::uint64_t>(plan.rounds) * plan.b0 *
        (index_bits(frame.frame_dim()) + 1);
    pass = pass && per_client == expected_exact &&
           per_client <= bit_budget &&
           est.stats.bits_total == 40 * per_client;
    detail += "sqkr bits/client " + std::to_string(per_client) + " <= " +
              std::to_string(bit_budget);
  }

  report(7, pass, detail);
}

TEST(Acceptance, Criterion8RhrErrorBounds) {
  const std::uint64_t n = 200;
  const std::uint32_t d = 16;
  const accountant::PrivacyBudget budget{1.0, 1e-5};
  const harness::FreqDataset data = harness::gen_synthetic_freq(
      n, d, harness::ItemDistribution::kUniform, 1.1, 81);
  bool pass = true;
  std::string detail;

  for (const int bits : {2, 3, 4}) {
    const freq::RhrShape shape = freq::RhrShape::create(d, bits);
    const double sigma2 =
        freq::rhr_calibrate(budget, n, d, bits).sigma2_sum;
    const int kTrials = 1000;
    std::vector<double> l2_samples(kTrials), l1_samples(kTrials);
    for (int t = 0; t < kTrials; ++t) {
      const freq::FreqEstimate est = freq::rhr_run(
          data.items, budget, bits, derive_seed(8001 + bits, t, "t"), sigma2);
      double sq = 0.0, l1 = 0.0;
      for (std::uint32_t v = 0; v < d; ++v) {
        const double e = est.estimate[v] - data.frequencies[v];
        sq += e * e;
        l1 += std::abs(e);
      }
      l2_samples[t] = sq;
      l1_samples[t] = l1;
    }
    const testing::MeanStderr l2 = testing::mean_stderr(l2_samples);
    const testing::MeanStderr l1 = testing::mean_stderr(l1_samples);
    const double b_chunk = shape.chunk_size;
    // Bounds at the orthonormal noise scale.
    const double l2_bound = b_chunk / n + d * sigma2;
    const double l1_bound = std::sqrt(d * b_chunk / n + d * d * sigma2);
    const bool ok_l2 = l2.mean <= l2_bound + 3.0 * l2.stderr_;
    const bool ok_l1 = l1.mean <= l1_bound + 3.0 * l1.stderr_;
    pass = pass && ok_l2 && ok_l1;
    detail += "b=" + std::to_string(bits) + ": l2 " +
              std::to_string(l2.mean) + "<=" + std::to_string(l2_bound) +
              " l1 " + std::to_string(l1.mean) + "<=" +
              std::to_string(l1_bound) + "  ";
  }
  report(8, pass, detail);
}

TEST(Acceptance, Criterion9And10CrossoverAndRdpOrdering) {
  const std::vector<double> grid{0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0};
  bool pass9 = true;
  bool pass10 = true;
  std::string detail9;
  double worst_rdp_excess = -1e300;

  for (const std::uint32_t d : {500u, 5000u}) {
    harness::ExperimentConfig csgm;
    csgm.protocol = harness::Protocol::kCsgm;
    csgm.n = 500;
    csgm.d = d;
    csgm.b = 50.0;
    csgm.eps_grid = grid;
    csgm.delta = 1e-5;
    csgm.trials = 500;
    csgm.data_seed = 90;
    csgm.protocol_seed = 91;
    csgm.accounting = harness::Accounting::kRdp;

    harness::ExperimentConfig gauss = csgm;
    gauss.protocol = harness::Protocol::kGaussianBaseline;
    gauss.b.reset();

    const std::vector<harness::SweepRow> c_rows = harness::run_sweep(csgm);
    const std::vector<harness::SweepRow> g_rows = harness::run_sweep(gauss);

    double crossover = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double ratio = c_rows[i].mse_mean / g_rows[i].mse_mean;
      if (ratio > 1.2) {
        crossover = grid[i];
        break;
      }
    }
    pass9 = pass9 && crossover >= 0.3 && crossover <= 1.0;
    detail9 += "d=" + std::to_string(d) + ": crossover eps = " +
               std::to_string(crossover) + "  ";

    for (const harness::SweepRow& row : c_rows) {
      if (row.gamma < 1.0 && !row.infeasible) {
        worst_rdp_excess =
            std::max(worst_rdp_excess, row.eps_rdp - row.eps_target);
        pass10 = pass10 && row.eps_rdp <= row.eps_target + 1e-9;
      }
    }
  }

  report(9, pass9, detail9);
  report(10, pass10,
         "worst eps_rdp - eps_target over gamma<1 rows: " +
             std::to_string(worst_rdp_excess));
}

}  // namespace
}  // namespace dpcomm
