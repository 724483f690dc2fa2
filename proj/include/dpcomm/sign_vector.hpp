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

#ifndef DPCOMM_SIGN_VECTOR_HPP_
#define DPCOMM_SIGN_VECTOR_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dpcomm/errors.hpp"
#include "dpcomm/rng.hpp"

namespace dpcomm::transforms {

// A vector whose entries all lie in {-c, +c}, stored as packed sign bits.
// Bit set means +c.
struct SignVector {
  std::vector<bool> bits;
  double magnitude = 1.0;

  SignVector() = default;
  SignVector(std::uint32_t dim, double c) : bits(dim, false), magnitude(c) {}

  std::uint32_t dim() const { return static_cast<std::uint32_t>(bits.size()); }
  double entry(std::uint32_t j) const {
    return bits[j] ? magnitude : -magnitude;
  }

  std::vector<double> to_real() const {
    std::vector<double> out(bits.size());
    for (std::uint32_t j = 0; j < bits.size(); ++j) out[j] = entry(j);
    return out;
  }
};

// Unbiased randomized rounding of xt (with ||xt||_inf <= c) onto {-c, +c}:
// coordinate j becomes +c with probability (xt[j] + c) / 2c, so the output
// equals xt in expectation.  Out-of-range coordinates are rejected rather
// than clipped; clipping would bias the estimate.
inline SignVector randomized_round(const std::vector<double>& xt, double c,
                                   Rng& rng) {
  if (c <= 0.0) throw RangeError("randomized_round: magnitude must be > 0");
  SignVector out(static_cast<std::uint32_t>(xt.size()), c);
  const double inv_2c = 1.0 / (2.0 * c);
  for (std::uint32_t j = 0; j < xt.size(); ++j) {
    if (std::abs(xt[j]) > c) {
      throw RangeError("randomized_round: |x[" + std::to_string(j) +
                       "]| = " + std::to_string(std::abs(xt[j])) +
                       " exceeds magnitude " + std::to_string(c));
    }
    const double p_plus = (xt[j] + c) * inv_2c;
    out.bits[j] = bernoulli(rng, p_plus);
  }
  return out;
}

}  // namespace dpcomm::transforms

#endif  // DPCOMM_SIGN_VECTOR_HPP_
