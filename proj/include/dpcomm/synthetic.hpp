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

#ifndef DPCOMM_SYNTHETIC_HPP_
#define DPCOMM_SYNTHETIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dpcomm/errors.hpp"
#include "dpcomm/freq_estimation.hpp"
#include "dpcomm/rng.hpp"
#include "dpcomm/sign_vector.hpp"

namespace dpcomm::harness {

// Synthetic mean-estimation data: each coordinate is +1/sqrt(d) with
// probability 0.8 and -1/sqrt(d) otherwise, so every vector has unit l2
// norm and l-inf norm exactly 1/sqrt(d), and the population mean is
// 0.6/sqrt(d) per coordinate.
inline std::vector<std::vector<double>> gen_synthetic_mean(
    std::uint64_t n, std::uint32_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw RangeError("gen_synthetic_mean: n, d must be >= 1");
  const double mag = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng = make_rng(seed, 0, "data.mean");
  std::vector<std::vector<double>> xs(n);
  for (auto& x : xs) {
    x.resize(d);
    for (double& v : x) v = bernoulli(rng, 0.8) ? mag : -mag;
  }
  return xs;
}

// The same data viewed as sign vectors with magnitude 1/sqrt(d); exact,
// since every entry already lies in {-1/sqrt(d), +1/sqrt(d)}.
inline std::vector<transforms::SignVector> to_sign_vectors(
    const std::vector<std::vector<double>>& xs, double magnitude) {
  std::vector<transforms::SignVector> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i].magnitude = magnitude;
    out[i].bits.resize(xs[i].size());
    for (std::size_t j = 0; j < xs[i].size(); ++j) {
      out[i].bits[j] = xs[i][j] > 0.0;
    }
  }
  return out;
}

enum class ItemDistribution { kUniform, kZipf };

struct FreqDataset {
  std::vector<freq::OneHotItem> items;
  std::vector<double> frequencies;  // true histogram / n, length = domain
};

// I.i.d. categorical items over [0, d): uniform, or Zipf with weight
// 1/(rank+1)^s.  Sampling is inverse-CDF on the cumulative weights so that
// a seed pins the dataset independently of the standard library.
inline FreqDataset gen_synthetic_freq(std::uint64_t n, std::uint32_t d,
                                      ItemDistribution dist, double zipf_s,
                                      std::uint64_t seed) {
  if (n < 1 || d < 1) throw RangeError("gen_synthetic_freq: n, d must be >= 1");
  std::vector<double> cumulative(d);
  double total = 0.0;
  for (std::uint32_t v = 0; v < d; ++v) {
    total += dist == ItemDistribution::kUniform
                 ? 1.0
                 : std::pow(static_cast<double>(v + 1), -zipf_s);
    cumulative[v] = total;
  }
  Rng rng = make_rng(seed, 0, "data.freq");
  FreqDataset out;
  out.items.resize(n);
  out.frequencies.assign(d, 0.0);
  for (auto& item : out.items) {
    const double u = uniform_unit(rng) * total;
    const std::uint32_t v = static_cast<std::uint32_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    item.index = std::min(v, d - 1);
    item.domain = d;
    out.frequencies[item.index] += 1.0 / static_cast<double>(n);
  }
  return out;
}

inline std::uint32_t next_power_of_two(std::uint32_t v) {
  std::uint32_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace dpcomm::harness

#endif  // DPCOMM_SYNTHETIC_HPP_
