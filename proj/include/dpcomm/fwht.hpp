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

#ifndef DPCOMM_FWHT_HPP_
#define DPCOMM_FWHT_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dpcomm/errors.hpp"

namespace dpcomm::transforms {

using RealVector = std::vector<double>;

constexpr bool is_power_of_two(std::size_t n) {
  return n > 0 && (n & (n - 1)) == 0;
}

// In-place orthonormal Walsh-Hadamard transform.  H is symmetric and its own
// inverse, so applying this twice restores the input.  O(B log B).
inline void fwht_inplace(std::span<double> v) {
  const std::size_t n = v.size();
  if (!is_power_of_two(n)) {
    throw DimensionError("fwht: length must be a power of two, got " +
                         std::to_string(n));
  }
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t block = 0; block < n; block += 2 * len) {
      for (std::size_t j = block; j < block + len; ++j) {
        const double a = v[j];
        const double b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& x : v) x *= scale;
}

inline RealVector fwht(RealVector v) {
  fwht_inplace(v);
  return v;
}

// Entry (row, col) of the orthonormal Hadamard matrix of size B:
// (-1)^{<row, col>} / sqrt(B), bits paired in natural (Sylvester) order.
inline double hadamard_entry(std::size_t b_dim, std::size_t row,
                             std::size_t col) {
  const int parity = __builtin_parityll(row & col);
  const double scale = 1.0 / std::sqrt(static_cast<double>(b_dim));
  return parity ? -scale : scale;
}

}  // namespace dpcomm::transforms

#endif  // DPCOMM_FWHT_HPP_
