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

#ifndef DPCOMM_RDP_HPP_
#define DPCOMM_RDP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dpcomm/accountant.hpp"
#include "dpcomm/errors.hpp"

// Renyi-DP accounting: per-order curves, additive composition, subsampled
// Gaussian bounds at integer orders, shuffle amplification in RDP form, and
// conversion back to (eps, delta)-DP.
namespace dpcomm::accountant {

// eps(alpha) sampled on an ascending grid of orders > 1.
struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> eps;

  // 1.5, 2..64, then a sparse high-order tail.
  static std::vector<double> default_orders() {
    std::vector<double> out{1.5};
    for (int a = 2; a <= 64; ++a) out.push_back(static_cast<double>(a));
    out.push_back(96.0);
    out.push_back(128.0);
    out.push_back(256.0);
    return out;
  }

  // The integer sub-grid, usable by the subsampled-Gaussian bound.
  static std::vector<double> default_integer_orders() {
    std::vector<double> out;
    for (int a = 2; a <= 64; ++a) out.push_back(static_cast<double>(a));
    out.push_back(96.0);
    out.push_back(128.0);
    out.push_back(256.0);
    return out;
  }
};

// Gaussian mechanism RDP: eps(alpha) = alpha * sensitivity^2 / (2 sigma^2).
inline double rdp_gaussian(double sensitivity, double sigma, double alpha) {
  if (!(sigma > 0.0)) throw RangeError("rdp_gaussian: sigma must be > 0");
  if (!(alpha > 1.0)) throw RangeError("rdp_gaussian: alpha must be > 1");
  return alpha * sensitivity * sensitivity / (2.0 * sigma * sigma);
}

// Poisson-subsampled Gaussian RDP at integer order alpha >= 2 (Zhu & Wang,
// arXiv:1908.10530 upper bound):
//   eps(alpha) = ln( sum_k C(alpha,k) (1-gamma)^{alpha-k} gamma^k
//                    e^{k(k-1)/(2 m^2)} ) / (alpha - 1),
// with m = sigma / sensitivity.  Evaluated in log space; if the sum still
// overflows, returns +inf as a "budget unbounded at this order" sentinel.
inline double rdp_subsampled_gaussian(double gamma, double noise_multiplier,
                                      int alpha) {
  if (alpha < 2) {
    throw RangeError("rdp_subsampled_gaussian: alpha must be an integer >= 2");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw RangeError("rdp_subsampled_gaussian: gamma must be in [0, 1]");
  }
  if (!(noise_multiplier > 0.0)) {
    throw RangeError("rdp_subsampled_gaussian: noise multiplier must be > 0");
  }
  const double m2 = noise_multiplier * noise_multiplier;
  const double log_gamma = std::log(gamma);        // -inf ok when gamma = 0
  const double log_1m = std::log1p(-gamma);        // -inf ok when gamma = 1
  const double lg_alpha = std::lgamma(alpha + 1.0);

  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(alpha + 1);
  for (int k = 0; k <= alpha; ++k) {
    if ((k > 0 && gamma == 0.0) || (k < alpha && gamma == 1.0)) continue;
    double t = lg_alpha - std::lgamma(k + 1.0) - std::lgamma(alpha - k + 1.0) +
               k * (k - 1) / (2.0 * m2);
    if (k > 0) t += k * log_gamma;
    if (k < alpha) t += (alpha - k) * log_1m;
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  if (!std::isfinite(max_term)) {
    return max_term > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  const double log_sum = max_term + std::log(acc);
  if (!std::isfinite(log_sum)) return std::numeric_limits<double>::infinity();
  return std::max(0.0, log_sum / (alpha - 1));
}

inline RdpCurve gaussian_curve(double noise_multiplier,
                               std::vector<double> orders) {
  RdpCurve c;
  c.orders = std::move(orders);
  c.eps.reserve(c.orders.size());
  for (double a : c.orders) c.eps.push_back(rdp_gaussian(1.0, noise_multiplier, a));
  return c;
}

// Curve over integer orders only; throws on a fractional order.
inline RdpCurve subsampled_gaussian_curve(double gamma,
                                          double noise_multiplier,
                                          std::vector<double> orders) {
  RdpCurve c;
  c.orders = std::move(orders);
  c.eps.reserve(c.orders.size());
  for (double a : c.orders) {
    const int ai = static_cast<int>(a);
    if (static_cast<double>(ai) != a) {
      throw RangeError(
          "subsampled_gaussian_curve: integer orders required, got " +
          std::to_string(a));
    }
    c.eps.push_back(rdp_subsampled_gaussian(gamma, noise_multiplier, ai));
  }
  return c;
}

// RDP of shuffling n eps0-LDP reports (Feldman, McMillan & Talwar,
// arXiv:2208.04591, Corollary 4.3 gives O(alpha (1-e^{-eps0})^2 e^{eps0}/n)
// for alpha < n / (16 eps0 e^{eps0})).  The hidden constant is fixed at 8
// here; this is a conservative upper bound, not a tight value.
inline double rdp_shuffle(double eps0, std::uint64_t n, double alpha) {
  if (!(eps0 > 0.0)) throw RangeError("rdp_shuffle: eps0 must be > 0");
  const double limit =
      static_cast<double>(n) / (16.0 * eps0 * std::exp(eps0));
  if (!(alpha > 1.0 && alpha < limit)) {
    throw RangeError("rdp_shuffle: order " + std::to_string(alpha) +
                     " outside validity range (1, " + std::to_string(limit) +
                     ")");
  }
  const double one_minus = -std::expm1(-eps0);  // 1 - e^{-eps0}
  return 8.0 * alpha * one_minus * one_minus * std::exp(eps0) /
         static_cast<double>(n);
}

// Shuffle-RDP curve restricted to orders inside the lemma's validity range.
inline RdpCurve shuffle_curve(double eps0, std::uint64_t n,
                              const std::vector<double>& orders) {
  const double limit =
      static_cast<double>(n) / (16.0 * eps0 * std::exp(eps0));
  RdpCurve c;
  for (double a : orders) {
    if (a > 1.0 && a < limit) {
      c.orders.push_back(a);
      c.eps.push_back(rdp_shuffle(eps0, n, a));
    }
  }
  if (c.orders.empty()) {
    throw InfeasibleError(
        "shuffle_curve: no grid order below the validity limit " +
        std::to_string(limit));
  }
  return c;
}

// Order-wise sum; all curves must share the grid.
inline RdpCurve rdp_compose(std::span<const RdpCurve> curves) {
  if (curves.empty()) throw RangeError("rdp_compose: no curves");
  RdpCurve out = curves.front();
  for (std::size_t i = 1; i < curves.size(); ++i) {
    if (curves[i].orders != out.orders) {
      throw RangeError("rdp_compose: order grids differ");
    }
    for (std::size_t j = 0; j < out.eps.size(); ++j) {
      out.eps[j] += curves[i].eps[j];
    }
  }
  return out;
}

inline RdpCurve rdp_scale(RdpCurve curve, double k) {
  for (double& e : curve.eps) e *= k;
  return curve;
}

// (eps, delta)-DP from an RDP curve: min over grid orders of
// eps(alpha) + ln(1/delta) / (alpha - 1).
inline double rdp_to_dp(const RdpCurve& curve, double delta) {
  if (curve.orders.empty()) throw RangeError("rdp_to_dp: empty curve");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw RangeError("rdp_to_dp: delta must be in (0, 1)");
  }
  double best = std::numeric_limits<double>::infinity();
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    best = std::min(best, curve.eps[i] + log_inv_delta / (curve.orders[i] - 1.0));
  }
  return best;
}

// Smallest noise multiplier m = sigma_sum / sensitivity such that `coords`
// composed Poisson-subsampled Gaussian releases at rate gamma meet the
// target under RDP accounting.  Bisection on m.
inline double calibrate_noise_multiplier_rdp(
    const PrivacyBudget& target, double gamma, std::uint64_t coords,
    const std::vector<double>& orders = RdpCurve::default_integer_orders()) {
  target.validate();
  auto accounted_eps = [&](double m) {
    const RdpCurve one = subsampled_gaussian_curve(gamma, m, orders);
    return rdp_to_dp(rdp_scale(one, static_cast<double>(coords)),
                     target.delta);
  };
  double lo = 1e-4, hi = 1.0;
  while (accounted_eps(hi) > target.eps) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {
      throw InfeasibleError(
          "calibrate_noise_multiplier_rdp: no multiplier below 1e12 meets "
          "the target");
    }
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (accounted_eps(mid) > target.eps ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace dpcomm::accountant

#endif  // DPCOMM_RDP_HPP_
