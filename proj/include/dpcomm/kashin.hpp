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

#ifndef DPCOMM_KASHIN_HPP_
#define DPCOMM_KASHIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dpcomm/errors.hpp"
#include "dpcomm/fwht.hpp"
#include "dpcomm/rng.hpp"

namespace dpcomm::transforms {

// Tight (Parseval) frame K in R^{d x D}, D = 2d, realized as the first d
// rows of H_D * diag(xi) with xi in {-1, +1}^D drawn from sign_seed.  Then
// K K^T = I_d exactly and both K and K^T apply in O(D log D) via the fast
// transform; no matrix is stored.
class KashinFrame {
 public:
  KashinFrame(std::uint32_t d, std::uint64_t sign_seed, double level = 8.0,
              int iters = 30)
      : d_(d), big_d_(2 * d), sign_seed_(sign_seed), level_(level),
        iters_(iters) {
    if (!is_power_of_two(d)) {
      throw DimensionError("KashinFrame: d must be a power of two, got " +
                           std::to_string(d));
    }
    if (level <= 0.0 || iters <= 0) {
      throw RangeError("KashinFrame: level and iters must be positive");
    }
    signs_.resize(big_d_);
    Rng rng(sign_seed);
    for (double& s : signs_) s = bernoulli(rng, 0.5) ? 1.0 : -1.0;
  }

  std::uint32_t d() const { return d_; }
  std::uint32_t frame_dim() const { return big_d_; }
  std::uint64_t sign_seed() const { return sign_seed_; }
  double level() const { return level_; }
  int iters() const { return iters_; }

  // The l-inf magnitude all frame coefficients of a ball-of-radius-c_bound
  // vector are guaranteed to fit in; this is the rounding magnitude used by
  // the l2 pipelines.
  double coefficient_bound(double c_bound) const {
    return level_ * c_bound / std::sqrt(static_cast<double>(big_d_));
  }

  // K * v: D -> d.
  std::vector<double> apply(const std::vector<double>& v) const {
    if (v.size() != big_d_) {
      throw DimensionError("KashinFrame::apply: expected dim " +
                           std::to_string(big_d_));
    }
    std::vector<double> w(big_d_);
    for (std::uint32_t j = 0; j < big_d_; ++j) w[j] = signs_[j] * v[j];
    fwht_inplace(w);
    w.resize(d_);
    return w;
  }

  // K^T * u: d -> D.
  std::vector<double> apply_adjoint(const std::vector<double>& u) const {
    if (u.size() != d_) {
      throw DimensionError("KashinFrame::apply_adjoint: expected dim " +
                           std::to_string(d_));
    }
    std::vector<double> w(u);
    w.resize(big_d_, 0.0);
    fwht_inplace(w);
    for (std::uint32_t j = 0; j < big_d_; ++j) w[j] *= signs_[j];
    return w;
  }

 private:
  std::uint32_t d_;
  std::uint32_t big_d_;
  std::uint64_t sign_seed_;
  double level_;
  int iters_;
  std::vector<double> signs_;
};

inline double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double linf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Kashin representation of x (||x||_2 <= c_bound): returns xt with
// x = K * xt and ||xt||_inf <= level * c_bound / sqrt(D).  Iterative frame
// projection with truncation: the residual is pushed through K^T, clamped
// at the level, accumulated, and its reconstruction subtracted.  Because
// the frame is Parseval, an un-clamped pass zeroes the residual, so the
// loop usually exits after one or two iterations.
inline std::vector<double> kashin_encode(const std::vector<double>& x,
                                         double c_bound,
                                         const KashinFrame& frame) {
  if (x.size() != frame.d()) {
    throw DimensionError("kashin_encode: expected dim " +
                         std::to_string(frame.d()));
  }
  if (c_bound <= 0.0) throw RangeError("kashin_encode: c_bound must be > 0");
  const std::uint32_t big_d = frame.frame_dim();
  const double norm_x = l2_norm(x);
  const double clamp_level =
      frame.level() * norm_x / std::sqrt(static_cast<double>(big_d));

  std::vector<double> xt(big_d, 0.0);
  std::vector<double> residual(x);
  const double tol = 1e-12 * std::max(c_bound, 1e-300);
  double res_norm = norm_x;
  for (int it = 0; it < frame.iters() && res_norm > tol; ++it) {
    std::vector<double> coeff = frame.apply_adjoint(residual);
    for (std::uint32_t j = 0; j < big_d; ++j) {
      double b = coeff[j];
      if (b > clamp_level) b = clamp_level;
      if (b < -clamp_level) b = -clamp_level;
      coeff[j] = b;
      xt[j] += b;
    }
    const std::vector<double> recon = frame.apply(coeff);
    for (std::uint32_t j = 0; j < frame.d(); ++j) residual[j] -= recon[j];
    res_norm = l2_norm(residual);
  }
  if (res_norm > 1e-6 * c_bound) {
    throw ConvergenceError(
        "kashin_encode: residual " + std::to_string(res_norm) +
            " after " + std::to_string(frame.iters()) +
            " iterations; resample sign_seed",
        res_norm);
  }
  if (linf_norm(xt) > frame.coefficient_bound(c_bound) * (1.0 + 1e-12)) {
    throw ConvergenceError(
        "kashin_encode: coefficient bound exceeded; resample sign_seed",
        res_norm);
  }
  return xt;
}

// K * xt.  Plain linear map; exact inverse of encode up to the encode
// residual tolerance.
inline std::vector<double> kashin_decode(const std::vector<double>& xt,
                                         const KashinFrame& frame) {
  return frame.apply(xt);
}

}  // namespace dpcomm::transforms

#endif  // DPCOMM_KASHIN_HPP_
