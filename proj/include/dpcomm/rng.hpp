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

#ifndef DPCOMM_RNG_HPP_
#define DPCOMM_RNG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dpcomm {

// All randomness in the library flows through explicitly seeded
// std::mt19937_64 streams.  Streams for distinct roles (sampling masks,
// rounding, noise, permutations, per-trial replicas) are derived from a
// master seed with derive_seed(), so results are independent of execution
// order and reproducible byte-for-byte.
using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Keyed derivation of a child seed from (master, index, label).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::string_view label) {
  std::uint64_t h = detail::splitmix64(master ^ detail::fnv1a64(label));
  return detail::splitmix64(h ^ detail::splitmix64(index));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index,
                    std::string_view label) {
  return Rng(derive_seed(master, index, label));
}

inline double uniform_unit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline bool bernoulli(Rng& rng, double p) { return uniform_unit(rng) < p; }

// Indices j in [0, dim) kept by an i.i.d. Bernoulli(gamma) mask, ascending.
// Uses geometric gap sampling, so the cost is O(gamma * dim) draws instead
// of dim.  This is the canonical mask stream: client and server derive the
// same list from the same seed.
inline std::vector<std::uint32_t> sample_bernoulli_indices(Rng& rng,
                                                           std::uint32_t dim,
                                                           double gamma) {
  std::vector<std::uint32_t> out;
  if (dim == 0 || gamma <= 0.0) return out;
  if (gamma >= 1.0) {
    out.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) out[j] = j;
    return out;
  }
  out.reserve(static_cast<std::size_t>(gamma * dim) + 8);
  const double log1m = std::log1p(-gamma);
  std::uint64_t pos = 0;
  while (true) {
    // skip ~ Geometric(gamma): failures before the next success.
    const double u = uniform_unit(rng);           // u in [0, 1)
    const double skip = std::floor(std::log1p(-u) / log1m);
    pos += static_cast<std::uint64_t>(skip);
    if (pos >= dim) break;
    out.push_back(static_cast<std::uint32_t>(pos));
    ++pos;
  }
  return out;
}

// Uniform subset of size k from [0, dim), without replacement, ascending.
inline std::vector<std::uint32_t> sample_subset(Rng& rng, std::uint32_t dim,
                                                std::uint32_t k) {
  if (k >= dim) {
    std::vector<std::uint32_t> all(dim);
    for (std::uint32_t j = 0; j < dim; ++j) all[j] = j;
    return all;
  }
  // Floyd's algorithm, then sort.
  std::vector<std::uint32_t> out;
  out.reserve(k);
  std::vector<bool> chosen(dim, false);
  for (std::uint32_t i = dim - k; i < dim; ++i) {
    std::uint32_t t =
        std::uniform_int_distribution<std::uint32_t>(0, i)(rng);
    if (chosen[t]) t = i;
    chosen[t] = true;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dpcomm

#endif  // DPCOMM_RNG_HPP_
