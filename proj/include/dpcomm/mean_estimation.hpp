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

#ifndef DPCOMM_MEAN_ESTIMATION_HPP_
#define DPCOMM_MEAN_ESTIMATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpcomm/accountant.hpp"
#include "dpcomm/errors.hpp"
#include "dpcomm/kashin.hpp"
#include "dpcomm/rng.hpp"
#include "dpcomm/sign_vector.hpp"
#include "dpcomm/transcript.hpp"

// Coordinate-subsampled Gaussian mean estimation: every client reports each
// coordinate independently with probability gamma (mask derived from a seed
// shared with the server, so only the sign bits travel), the server averages
// the received bits per coordinate, rescales by 1/(n gamma), and adds
// Gaussian noise calibrated by the accountant.  The coordinate pre-selection
// variant first restricts everyone to a shared random subset of coordinates;
// the l2 pipeline brings arbitrary bounded-norm vectors into this l-inf
// geometry through a Kashin representation plus randomized rounding.
namespace dpcomm::mean {

using transforms::KashinFrame;
using transforms::SignVector;

struct CsgmConfig {
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  double gamma = 1.0;  // = min(1, b/d) for bit budget b
  accountant::PrivacyBudget budget;
  double c = 1.0;  // l-inf magnitude of client data
  std::uint64_t shared_seed = 0;

  static CsgmConfig from_bits(std::uint64_t n, std::uint32_t d, double bits,
                              accountant::PrivacyBudget budget, double c,
                              std::uint64_t shared_seed) {
    CsgmConfig cfg{n, d, std::min(1.0, bits / d), budget, c, shared_seed};
    return cfg;
  }
};

// One client's report: the sampled coordinates (reproducible from the
// shared seed) and one sign bit per sampled coordinate.  Only the bits are
// counted as communication.
struct CsgmReport {
  std::vector<std::uint32_t> coords;
  std::vector<bool> signs;
};

struct MeanEstimate {
  std::vector<double> estimate;
  accountant::NoiseCalibration calibration;
  TranscriptStats stats;
};

inline Rng client_mask_rng(std::uint64_t shared_seed,
                           std::uint64_t client_index) {
  return make_rng(shared_seed, client_index, "csgm.mask");
}

inline CsgmReport csgm_client_encode(const SignVector& x,
                                     std::uint64_t client_index,
                                     const CsgmConfig& config) {
  if (x.dim() != config.d) {
    throw DimensionError("csgm_client_encode: client vector has dim " +
                         std::to_string(x.dim()) + ", config says " +
                         std::to_string(config.d));
  }
  Rng mask_rng = client_mask_rng(config.shared_seed, client_index);
  CsgmReport report;
  report.coords = sample_bernoulli_indices(mask_rng, config.d, config.gamma);
  report.signs.reserve(report.coords.size());
  for (std::uint32_t j : report.coords) report.signs.push_back(x.bits[j]);
  return report;
}

// Server side: fold reports into per-coordinate sums, rescale by 1/(n gamma)
// and perturb with sigma2_mean from the calibration.  Pass
// NoiseCalibration::none() to run noiseless (tests, compression-only
// baselines).
inline MeanEstimate csgm_aggregate(std::span<const CsgmReport> reports,
                                   const CsgmConfig& config,
                                   const accountant::NoiseCalibration& cal,
                                   Rng& noise_rng) {
  std::vector<double> sums(config.d, 0.0);
  TranscriptStats stats;
  for (const CsgmReport& r : reports) {
    for (std::size_t k = 0; k < r.coords.size(); ++k) {
      const std::uint32_t j = r.coords[k];
      if (j >= config.d) {
        throw ProtocolViolation("csgm_aggregate: coordinate " +
                                std::to_string(j) + " out of range");
      }
      sums[j] += r.signs[k] ? config.c : -config.c;
    }
    stats.bits_total += r.coords.size();  // one bit per reported coordinate
    stats.messages_total += 1;
  }
  stats.client_slots = config.n;

  MeanEstimate out;
  out.calibration = cal;
  out.stats = stats;
  const double scale = 1.0 / (static_cast<double>(config.n) * config.gamma);
  const double sigma = std::sqrt(cal.sigma2_mean);
  out.estimate.resize(config.d);
  for (std::uint32_t j = 0; j < config.d; ++j) {
    double noise = sigma > 0.0 ? sigma * standard_normal(noise_rng) : 0.0;
    out.estimate[j] = sums[j] * scale + noise;
  }
  return out;
}

// Full CSGM round: calibrate (unless an override is supplied), encode every
// client, aggregate.  The override is for noiseless tests and baselines.
inline MeanEstimate csgm_run(
    std::span<const SignVector> clients, const CsgmConfig& config,
    std::uint64_t noise_seed,
    const std::optional<accountant::NoiseCalibration>& override_cal = {}) {
  accountant::NoiseCalibration cal;
  if (override_cal.has_value()) {
    cal = *override_cal;
  } else {
    cal = accountant::calibrate_subsampled_gaussian(
        config.budget, config.gamma, config.d, config.c);
    cal.resolve_mean_scale(config.n);
  }
  std::vector<CsgmReport> reports;
  reports.reserve(clients.size());
  for (std::uint64_t i = 0; i < clients.size(); ++i) {
    reports.push_back(csgm_client_encode(clients[i], i, config));
  }
  Rng noise_rng = make_rng(noise_seed, 0, "csgm.noise");
  return csgm_aggregate(reports, config, cal, noise_rng);
}

// d' of the pre-selection scheme:
// max(1, floor(min(d, n b, n^2 eps^2 / ((ln(1/delta)+eps) ln(d/delta))))).
inline std::uint32_t select_dprime(std::uint64_t n, double bits,
                                   std::uint32_t d,
                                   const accountant::PrivacyBudget& budget) {
  budget.validate();
  const double nd = static_cast<double>(n);
  const double privacy_term =
      nd * nd * budget.eps * budget.eps /
      ((std::log(1.0 / budget.delta) + budget.eps) *
       std::log(d / budget.delta));
  const double raw =
      std::min({static_cast<double>(d), nd * bits, privacy_term});
  return static_cast<std::uint32_t>(std::max(1.0, std::floor(raw)));
}

struct PreselectSeeds {
  std::uint64_t selection = 0;
  std::uint64_t masks = 0;
  std::uint64_t noise = 0;

  static PreselectSeeds derive(std::uint64_t master) {
    return {derive_seed(master, 0, "preselect.selection"),
            derive_seed(master, 0, "preselect.masks"),
            derive_seed(master, 0, "preselect.noise")};
  }
};

// CSGM restricted to a shared uniform subset J of d_prime coordinates,
// with the selected coordinates rescaled by d/d' and the rest zero-filled.
// Unbiased over the randomness of J.  The bit-budget overload below derives
// (d_prime, gamma) the standard way.
inline MeanEstimate csgm_preselect_run_with(
    std::span<const SignVector> clients, std::uint32_t d_prime, double gamma,
    const accountant::PrivacyBudget& budget, const PreselectSeeds& seeds,
    const std::optional<accountant::NoiseCalibration>& override_cal = {}) {
  if (clients.empty()) throw RangeError("csgm_preselect_run: no clients");
  const std::uint64_t n = clients.size();
  const std::uint32_t d = clients.front().dim();
  const double c = clients.front().magnitude;
  if (d_prime < 1 || d_prime > d) {
    throw RangeError("csgm_preselect_run: d_prime out of range");
  }

  Rng select_rng(seeds.selection);
  const std::vector<std::uint32_t> selected =
      sample_subset(select_rng, d, d_prime);

  std::vector<SignVector> restricted(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    SignVector& r = restricted[i];
    r.magnitude = c;
    r.bits.resize(d_prime);
    for (std::uint32_t k = 0; k < d_prime; ++k) {
      r.bits[k] = clients[i].bits[selected[k]];
    }
  }

  CsgmConfig inner{n, d_prime, gamma, budget, c, seeds.masks};
  MeanEstimate est = csgm_run(restricted, inner, seeds.noise, override_cal);

  MeanEstimate out;
  out.calibration = est.calibration;
  out.stats = est.stats;
  out.estimate.assign(d, 0.0);
  const double rescale = static_cast<double>(d) / d_prime;
  for (std::uint32_t k = 0; k < d_prime; ++k) {
    out.estimate[selected[k]] = rescale * est.estimate[k];
  }
  return out;
}

inline MeanEstimate csgm_preselect_run(
    std::span<const SignVector> clients, double bits,
    const accountant::PrivacyBudget& budget, const PreselectSeeds& seeds,
    const std::optional<accountant::NoiseCalibration>& override_cal = {}) {
  if (clients.empty()) throw RangeError("csgm_preselect_run: no clients");
  const std::uint32_t d_prime =
      select_dprime(clients.size(), bits, clients.front().dim(), budget);
  const double gamma = std::min(1.0, bits / d_prime);
  return csgm_preselect_run_with(clients, d_prime, gamma, budget, seeds,
                                 override_cal);
}

struct PipelineSeeds {
  std::uint64_t rounding = 0;
  std::uint64_t protocol = 0;

  static PipelineSeeds derive(std::uint64_t master) {
    return {derive_seed(master, 0, "pipeline.rounding"),
            derive_seed(master, 0, "pipeline.protocol")};
  }
};

// l2 mean estimation end to end: Kashin-encode each ||x_i||_2 <= c_bound
// vector into the frame domain, randomized-round to sign vectors of
// magnitude level * c_bound / sqrt(D), run pre-selected CSGM there, and
// decode the estimate back to R^d.  Every stage is unbiased and positively
// homogeneous, so the whole pipeline is too.
inline MeanEstimate l2_mean_pipeline(
    const std::vector<std::vector<double>>& xs, double c_bound, double bits,
    const accountant::PrivacyBudget& budget, const KashinFrame& frame,
    const PipelineSeeds& seeds,
    const std::optional<accountant::NoiseCalibration>& override_cal = {}) {
  if (xs.empty()) throw RangeError("l2_mean_pipeline: no clients");
  const std::uint32_t d = frame.d();
  const double c = frame.coefficient_bound(c_bound);

  std::vector<SignVector> rounded(xs.size());
  for (std::uint64_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != d) {
      throw DimensionError("l2_mean_pipeline: client " + std::to_string(i) +
                           " has dim " + std::to_string(xs[i].size()) +
                           ", frame wants " + std::to_string(d));
    }
    const std::vector<double> coeffs =
        transforms::kashin_encode(xs[i], c_bound, frame);
    Rng round_rng = make_rng(seeds.rounding, i, "pipeline.round");
    rounded[i] = transforms::randomized_round(coeffs, c, round_rng);
  }

  MeanEstimate frame_est = csgm_preselect_run(
      rounded, bits, budget, PreselectSeeds::derive(seeds.protocol),
      override_cal);

  MeanEstimate out;
  out.calibration = frame_est.calibration;
  out.stats = frame_est.stats;
  out.estimate = transforms::kashin_decode(frame_est.estimate, frame);
  return out;
}

}  // namespace dpcomm::mean

#endif  // DPCOMM_MEAN_ESTIMATION_HPP_
