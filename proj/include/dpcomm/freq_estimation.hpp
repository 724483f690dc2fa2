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

#ifndef DPCOMM_FREQ_ESTIMATION_HPP_
#define DPCOMM_FREQ_ESTIMATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpcomm/accountant.hpp"
#include "dpcomm/errors.hpp"
#include "dpcomm/fwht.hpp"
#include "dpcomm/rng.hpp"
#include "dpcomm/transcript.hpp"

// Subsampled recursive Hadamard response for frequency estimation over a
// power-of-two domain of size d.  The one-hot item vector is split into
// 2^{b-1} chunks of size B = d / 2^{b-1}; the client Hadamard-transforms
// its (single nonzero) chunk, samples each transform coordinate j with
// probability 1/B from a seed shared with the server, and reports, per
// sampled j, the chunk index (b-1 bits) and the sign of the transform entry
// (1 bit).  The server rebuilds noisy per-chunk transforms, adds Gaussian
// noise to every cell, inverts with the same orthonormal transform and
// concatenates.
//
// All transform values here use the orthonormal Hadamard convention
// (entries +-1/sqrt(B), forward = inverse); noise scales and sensitivities
// are expressed at that scale.
namespace dpcomm::freq {

struct OneHotItem {
  std::uint32_t index = 0;   // in [0, domain)
  std::uint32_t domain = 0;  // d, power of two
};

struct RhrReport {
  std::uint32_t coord = 0;  // j in [0, B)
  std::uint32_t chunk = 0;  // l in [0, 2^{b-1})
  bool positive = true;     // sign of the transform entry
};

struct FreqEstimate {
  std::vector<double> estimate;
  accountant::NoiseCalibration calibration;
  TranscriptStats stats;
};

struct RhrShape {
  std::uint32_t d = 0;
  int bits = 0;
  std::uint32_t chunks = 0;      // 2^{b-1}
  std::uint32_t chunk_size = 0;  // B = d / 2^{b-1}

  static RhrShape create(std::uint32_t d, int bits) {
    if (!transforms::is_power_of_two(d)) {
      throw DimensionError("rhr: domain size must be a power of two, got " +
                           std::to_string(d));
    }
    if (bits < 1) throw RangeError("rhr: bit budget must be >= 1");
    const std::uint64_t chunks = 1ull << (bits - 1);
    if (chunks > d) {
      throw ConfigError("rhr: 2^{b-1} = " + std::to_string(chunks) +
                        " exceeds the domain size " + std::to_string(d) +
                        " (B < 1)");
    }
    RhrShape s;
    s.d = d;
    s.bits = bits;
    s.chunks = static_cast<std::uint32_t>(chunks);
    s.chunk_size = d / s.chunks;
    return s;
  }
};

inline Rng rhr_mask_rng(std::uint64_t shared_seed, std::uint64_t client_index) {
  return make_rng(shared_seed, client_index, "rhr.mask");
}

// Expected number of reports per client is exactly 1 (B coordinates, each
// sampled with probability 1/B); each report costs b bits on the wire.
inline std::vector<RhrReport> rhr_client_encode(const OneHotItem& item,
                                                int bits,
                                                std::uint64_t shared_seed,
                                                std::uint64_t client_index) {
  const RhrShape shape = RhrShape::create(item.domain, bits);
  if (item.index >= item.domain) {
    throw RangeError("rhr_client_encode: item index out of domain");
  }
  const std::uint32_t chunk = item.index / shape.chunk_size;
  const std::uint32_t offset = item.index % shape.chunk_size;

  Rng mask_rng = rhr_mask_rng(shared_seed, client_index);
  const std::vector<std::uint32_t> sampled = sample_bernoulli_indices(
      mask_rng, shape.chunk_size, 1.0 / shape.chunk_size);

  std::vector<RhrReport> reports;
  reports.reserve(sampled.size());
  for (std::uint32_t j : sampled) {
    const bool positive =
        transforms::hadamard_entry(shape.chunk_size, j, offset) > 0.0;
    reports.push_back(RhrReport{j, chunk, positive});
  }
  return reports;
}

// Verified l2 sensitivity of one subsampled per-coordinate release at the
// orthonormal scale: a client flips at most one transform entry of
// magnitude (B/n) * (1/sqrt(B)), so the worst-case change is
// 2 sqrt(B) / n (same chunk, opposite sign).  The classical B/n value
// converts to sqrt(B)/n at this scale; the max of the two is used so the
// mechanism is never under-noised.  The exhaustive neighboring-dataset
// search in the tests pins this.
inline double rhr_sensitivity(std::uint64_t n, std::uint32_t chunk_size) {
  const double nd = static_cast<double>(n);
  const double verified = 2.0 * std::sqrt(static_cast<double>(chunk_size)) / nd;
  const double classical = std::sqrt(static_cast<double>(chunk_size)) / nd;
  return std::max(verified, classical);
}

// Per-cell noise variance meeting `budget`: one Poisson-subsampled Gaussian
// release per transform coordinate j (rate 1/B), composed over the B
// coordinates.
inline accountant::NoiseCalibration rhr_calibrate(
    const accountant::PrivacyBudget& budget, std::uint64_t n, std::uint32_t d,
    int bits) {
  const RhrShape shape = RhrShape::create(d, bits);
  accountant::NoiseCalibration cal = accountant::calibrate_subsampled_gaussian(
      budget, 1.0 / shape.chunk_size, shape.chunk_size,
      rhr_sensitivity(n, shape.chunk_size));
  cal.sigma2_mean = cal.sigma2_sum;  // noise is applied at aggregate scale
  return cal;
}

inline FreqEstimate rhr_aggregate(std::span<const RhrReport> reports,
                                  std::uint64_t n, std::uint32_t d, int bits,
                                  double sigma2, Rng& noise_rng) {
  const RhrShape shape = RhrShape::create(d, bits);
  // cells[l * B + j] accumulates the reported transform entries of chunk l
  // at coordinate j.
  std::vector<double> cells(d, 0.0);
  const double entry_mag = 1.0 / std::sqrt(static_cast<double>(shape.chunk_size));
  TranscriptStats stats;
  for (const RhrReport& r : reports) {
    if (r.coord >= shape.chunk_size || r.chunk >= shape.chunks) {
      throw ProtocolViolation("rhr_aggregate: report (" +
                              std::to_string(r.chunk) + ", " +
                              std::to_string(r.coord) + ") out of range");
    }
    cells[static_cast<std::size_t>(r.chunk) * shape.chunk_size + r.coord] +=
        r.positive ? entry_mag : -entry_mag;
    stats.bits_total += bits;
    stats.messages_total += 1;
  }
  stats.client_slots = n;

  const double rescale = static_cast<double>(shape.chunk_size) / n;
  const double sigma = std::sqrt(sigma2);
  for (double& cell : cells) {
    const double noise = sigma > 0.0 ? sigma * standard_normal(noise_rng) : 0.0;
    cell = cell * rescale + noise;
  }
  // Invert chunk by chunk; the orthonormal transform is its own inverse.
  for (std::uint32_t l = 0; l < shape.chunks; ++l) {
    transforms::fwht_inplace(std::span<double>(
        cells.data() + static_cast<std::size_t>(l) * shape.chunk_size,
        shape.chunk_size));
  }
  FreqEstimate out;
  out.estimate = std::move(cells);
  out.stats = stats;
  return out;
}

// Full pipeline: calibrate (unless overridden), encode all clients,
// aggregate.
inline FreqEstimate rhr_run(std::span<const OneHotItem> items,
                            const accountant::PrivacyBudget& budget, int bits,
                            std::uint64_t seed,
                            std::optional<double> sigma2_override = {}) {
  if (items.empty()) throw RangeError("rhr_run: no clients");
  const std::uint32_t d = items.front().domain;
  const std::uint64_t n = items.size();

  accountant::NoiseCalibration cal;
  double sigma2 = 0.0;
  if (sigma2_override.has_value()) {
    sigma2 = *sigma2_override;
    cal.sigma2_sum = cal.sigma2_mean = sigma2;
  } else {
    cal = rhr_calibrate(budget, n, d, bits);
    sigma2 = cal.sigma2_sum;
  }

  const std::uint64_t mask_seed = derive_seed(seed, 0, "rhr.shared");
  std::vector<RhrReport> reports;
  reports.reserve(n + n / 4);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (items[i].domain != d) {
      throw DimensionError("rhr_run: inconsistent domain sizes");
    }
    const std::vector<RhrReport> r =
        rhr_client_encode(items[i], bits, mask_seed, i);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  Rng noise_rng = make_rng(seed, 0, "rhr.noise");
  FreqEstimate out = rhr_aggregate(reports, n, d, bits, sigma2, noise_rng);
  out.calibration = cal;
  return out;
}

}  // namespace dpcomm::freq

#endif  // DPCOMM_FREQ_ESTIMATION_HPP_
