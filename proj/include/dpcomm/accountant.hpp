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

#ifndef DPCOMM_ACCOUNTANT_HPP_
#define DPCOMM_ACCOUNTANT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "dpcomm/errors.hpp"

// Closed-form (eps, delta) budget arithmetic: Gaussian calibration, Poisson
// subsampling amplification, advanced composition, the end-to-end noise
// calibration chain for coordinate-subsampled Gaussian mechanisms, and
// shuffle amplification.  All logarithms here are natural; bit counting
// elsewhere uses log2.
namespace dpcomm::accountant {

struct PrivacyBudget {
  double eps = 0.0;
  double delta = 0.0;

  void validate() const {
    if (!(eps > 0.0)) throw RangeError("PrivacyBudget: eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) {
      throw RangeError("PrivacyBudget: delta must be in (0, 1)");
    }
  }
};

// Resolved noise scale plus the intermediate budgets of the calibration
// chain, retained so runs can be audited after the fact.
struct NoiseCalibration {
  double sigma2_sum = 0.0;   // variance at aggregate (sum) scale
  double sigma2_mean = 0.0;  // sigma2_sum / (n * gamma)^2, set by the caller
  double eps1 = 0.0;         // per-coordinate budget before amplification
  double delta1 = 0.0;
  double eps2 = 0.0;         // per-coordinate budget after amplification
  double delta2 = 0.0;
  double gamma = 1.0;        // Poisson sampling rate
  std::uint64_t coords = 1;  // number of composed coordinate releases
  double sensitivity = 0.0;

  // Noiseless calibration for tests and unprotected baselines.
  static NoiseCalibration none() { return NoiseCalibration{}; }

  NoiseCalibration& resolve_mean_scale(std::uint64_t n) {
    const double scale = static_cast<double>(n) * gamma;
    sigma2_mean = scale > 0.0 ? sigma2_sum / (scale * scale) : 0.0;
    return *this;
  }
};

// Gaussian mechanism sigma^2 for l2 sensitivity `sensitivity` at (eps,
// delta), valid for eps < 1 (Balle & Wang, arXiv:1805.06530, classic form):
// sigma^2 = sensitivity^2 * 2 ln(1.25/delta) / eps^2.
inline double gaussian_sigma2(double sensitivity, const PrivacyBudget& b) {
  b.validate();
  if (sensitivity <= 0.0) {
    throw RangeError("gaussian_sigma2: sensitivity must be > 0");
  }
  if (b.eps >= 1.0) {
    throw RangeError(
        "gaussian_sigma2: eps must be < 1 for this closed form; cap the "
        "per-release eps at 1 (the calibration chain does)");
  }
  return sensitivity * sensitivity * 2.0 * std::log(1.25 / b.delta) /
         (b.eps * b.eps);
}

// Privacy amplification by Poisson subsampling at rate gamma:
// (eps, delta) -> (ln(1 + gamma (e^eps - 1)), gamma * delta).
inline PrivacyBudget amplify_poisson(double eps, double delta, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw RangeError("amplify_poisson: gamma must be in (0, 1]");
  }
  return {std::log1p(gamma * std::expm1(eps)), gamma * delta};
}

// Advanced composition of k (eps, delta)-DP releases with slack delta_tilde:
// eps_total = k eps (e^eps - 1) + eps sqrt(2 k ln(1/delta_tilde)),
// delta_total = k delta + delta_tilde.
inline PrivacyBudget compose_advanced(double eps, double delta,
                                      std::uint64_t k, double delta_tilde) {
  if (k < 1) throw RangeError("compose_advanced: k must be >= 1");
  if (!(delta_tilde > 0.0 && delta_tilde <= 1.0)) {
    throw RangeError("compose_advanced: delta_tilde must be in (0, 1]");
  }
  const double kd = static_cast<double>(k);
  const double eps_total = kd * eps * std::expm1(eps) +
                           eps * std::sqrt(2.0 * kd * std::log(1.0 / delta_tilde));
  return {eps_total, kd * delta + delta_tilde};
}

namespace detail {

// Smallest positive root of 2B x^2 + x sqrt(2B ln(2/delta)) = eps, the
// relaxation of the composed budget valid for x <= 1 (e^x - 1 <= 2x there).
inline double eps2_closed_form(double eps, double delta, double coords) {
  const double t = 2.0 * coords * std::log(2.0 / delta);
  return (-std::sqrt(t) + std::sqrt(t + 8.0 * eps * coords)) /
         (4.0 * coords);
}

// Exact per-coordinate budget: solve
// B x (e^x - 1) + x sqrt(2B ln(2/delta)) = eps for x by bisection.
inline double eps2_bisect(double eps, double delta, double coords) {
  const double root = std::sqrt(2.0 * coords * std::log(2.0 / delta));
  auto composed = [&](double x) {
    return coords * x * std::expm1(x) + x * root;
  };
  double lo = 0.0, hi = 1.0;
  if (composed(hi) <= eps) return hi;
  for (int i = 0; i < 200 && (hi - lo) > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (composed(mid) <= eps ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

// End-to-end noise calibration for a mechanism that Poisson-subsamples each
// of `coords` coordinate groups at rate gamma, adds Gaussian noise at sum
// scale, and must meet `target` overall.  Chain:
//   delta_tilde = delta/2, delta2 = delta/(2B), delta1 = delta2/gamma,
//   eps2 = min(1, closed-form quadratic root), eps1 = min(1-, exact Poisson
//   inversion ln(1 + (e^{eps2}-1)/gamma)), sigma2 = gaussian_sigma2(eps1,
//   delta1).
// Pushing the result forward (amplify_poisson then compose_advanced over B
// folds) always lands at or below the target; audit_calibration checks it.
// With exact_eps2 the quadratic relaxation is replaced by a bisection on
// the un-relaxed composition, giving slightly less noise.
inline NoiseCalibration calibrate_subsampled_gaussian(
    const PrivacyBudget& target, double gamma, std::uint64_t coords,
    double sensitivity, bool exact_eps2 = false) {
  target.validate();
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw RangeError("calibrate_subsampled_gaussian: gamma must be in (0, 1]");
  }
  if (coords < 1) {
    throw RangeError("calibrate_subsampled_gaussian: coords must be >= 1");
  }
  const double b_coords = static_cast<double>(coords);
  NoiseCalibration cal;
  cal.gamma = gamma;
  cal.coords = coords;
  cal.sensitivity = sensitivity;
  cal.delta2 = target.delta / (2.0 * b_coords);
  cal.delta1 = cal.delta2 / gamma;
  if (cal.delta1 >= 1.0) {
    throw InfeasibleError(
        "calibrate_subsampled_gaussian: delta1 = delta/(2 B gamma) = " +
        std::to_string(cal.delta1) +
        " >= 1; gamma too small for the requested delta");
  }
  const double raw_eps2 =
      exact_eps2 ? detail::eps2_bisect(target.eps, target.delta, b_coords)
                 : detail::eps2_closed_form(target.eps, target.delta, b_coords);
  cal.eps2 = std::min(1.0, raw_eps2);
  cal.eps1 = std::min(1.0 - 1e-9, std::log1p(std::expm1(cal.eps2) / gamma));
  cal.sigma2_sum =
      gaussian_sigma2(sensitivity, PrivacyBudget{cal.eps1, cal.delta1});
  return cal;
}

// Replays the forward chain of a calibration; the result must be <= the
// target component-wise for the calibration to be valid.
inline PrivacyBudget audit_calibration(const NoiseCalibration& cal,
                                       double target_delta) {
  const PrivacyBudget amplified =
      amplify_poisson(cal.eps1, cal.delta1, cal.gamma);
  return compose_advanced(amplified.eps, amplified.delta, cal.coords,
                          target_delta / 2.0);
}

// Largest per-report local budget the shuffle amplification bound accepts.
inline double amplify_shuffle_max_eps0(std::uint64_t n, double delta) {
  return std::min(
      1.0, std::log(static_cast<double>(n) / (16.0 * std::log(2.0 / delta))));
}

// Privacy amplification by shuffling n eps0-LDP reports (closed-form bound
// of Feldman, McMillan & Talwar, arXiv:2012.12803):
// eps = ln(1 + (e^{eps0}-1) (4 sqrt(2 ln(4/delta)) / sqrt((e^{eps0}+1) n)
//                            + 4/n)).
// Valid for eps0 <= 1 and eps0 <= ln(n / (16 ln(2/delta))).
inline double amplify_shuffle(double eps0, std::uint64_t n, double delta) {
  if (!(eps0 > 0.0)) throw RangeError("amplify_shuffle: eps0 must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw RangeError("amplify_shuffle: delta must be in (0, 1)");
  }
  const double bound = amplify_shuffle_max_eps0(n, delta);
  if (eps0 > bound) {
    throw InfeasibleError(
        "amplify_shuffle: eps0 = " + std::to_string(eps0) +
        " exceeds min(1, ln(n/(16 ln(2/delta)))) = " + std::to_string(bound));
  }
  const double nd = static_cast<double>(n);
  const double factor =
      4.0 * std::sqrt(2.0 * std::log(4.0 / delta)) /
          std::sqrt((std::exp(eps0) + 1.0) * nd) +
      4.0 / nd;
  return std::log1p(std::expm1(eps0) * factor);
}

}  // namespace dpcomm::accountant

#endif  // DPCOMM_ACCOUNTANT_HPP_
