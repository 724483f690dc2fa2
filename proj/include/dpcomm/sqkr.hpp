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

#ifndef DPCOMM_SQKR_HPP_
#define DPCOMM_SQKR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpcomm/accountant.hpp"
#include "dpcomm/errors.hpp"
#include "dpcomm/kashin.hpp"
#include "dpcomm/mean_estimation.hpp"
#include "dpcomm/rdp.hpp"
#include "dpcomm/rng.hpp"
#include "dpcomm/sign_vector.hpp"
#include "dpcomm/transcript.hpp"

// Multi-round shuffled SQKR mean estimation.  Per round, each client samples
// b0 coordinates of its sign vector uniformly with replacement and passes
// the b0-bit sign string through exact 2^{b0}-ary randomized response; a
// trusted shuffler applies one uniform permutation to the whole round before
// the server sees it.  The server debiases, averages rounds, and decodes
// through the Kashin frame.  The planner splits the privacy budget across
// rounds using shuffle amplification plus advanced composition (or RDP).
namespace dpcomm::shuffle {

using mean::MeanEstimate;
using transforms::KashinFrame;
using transforms::SignVector;

// One client's per-round message: b0 coordinate indices and b0 sign values.
struct SqkrReport {
  std::vector<std::uint32_t> coords;
  std::vector<bool> signs;  // true = +c
};

struct ShufflePlan {
  int rounds = 0;           // T
  double eps0 = 0.0;        // per-round local budget
  int b0 = 1;               // coordinates per round
  double delta1 = 0.0;      // per-round shuffle delta
  double delta2 = 0.0;      // composition slack
  accountant::PrivacyBudget target;
  accountant::PrivacyBudget accounted;

  std::uint64_t bits_per_client(std::uint32_t dim) const {
    return static_cast<std::uint64_t>(rounds) * b0 * (index_bits(dim) + 1);
  }
};

inline double rr_truth_probability(double eps0, int b0) {
  const double strings = std::ldexp(1.0, b0);  // 2^{b0}
  return std::exp(eps0) / (std::exp(eps0) + strings - 1.0);
}

// Exact 2^{b0}-ary randomized response over the sampled sign string: the
// true string with probability e^{eps0} / (e^{eps0} + 2^{b0} - 1), else
// uniform over the other 2^{b0} - 1 strings.  Every output string then has
// likelihood ratio exactly e^{eps0} between any two inputs, and the
// (e^{eps0} + 2^{b0} - 1) / (e^{eps0} - 1) estimator constant debiases it
// exactly.
inline SqkrReport sqkr_randomize(const SignVector& x, double eps0, int b0,
                                 Rng& rng) {
  if (!(eps0 > 0.0)) throw RangeError("sqkr_randomize: eps0 must be > 0");
  if (b0 < 1 || b0 >= 63) throw RangeError("sqkr_randomize: bad b0");
  SqkrReport report;
  report.coords.resize(b0);
  std::uniform_int_distribution<std::uint32_t> coord_dist(0, x.dim() - 1);
  std::uint64_t truth = 0;
  for (int j = 0; j < b0; ++j) {
    report.coords[j] = coord_dist(rng);
    truth = (truth << 1) | (x.bits[report.coords[j]] ? 1u : 0u);
  }
  const std::uint64_t n_strings = 1ull << b0;
  std::uint64_t out = truth;
  if (!bernoulli(rng, rr_truth_probability(eps0, b0))) {
    // Uniform over the other 2^{b0} - 1 strings.
    std::uint64_t r =
        std::uniform_int_distribution<std::uint64_t>(0, n_strings - 2)(rng);
    out = r < truth ? r : r + 1;
  }
  report.signs.resize(b0);
  for (int j = 0; j < b0; ++j) {
    report.signs[j] = ((out >> (b0 - 1 - j)) & 1u) != 0;
  }
  return report;
}

// One uniform permutation per round; report contents travel untouched.
inline std::vector<SqkrReport> shuffle_round(std::vector<SqkrReport> reports,
                                             Rng& rng) {
  for (std::size_t i = reports.size(); i > 1; --i) {
    const std::size_t j =
        std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(reports[i - 1], reports[j]);
  }
  return reports;
}

// The round estimator:
// (d / (n b0)) * ((e^{eps0} + 2^{b0} - 1) / (e^{eps0} - 1))
//   * sum_i sum_j Y(i,j) e_{s(i,j)}.
inline std::vector<double> sqkr_estimate(std::span<const SqkrReport> reports,
                                         double eps0, int b0, std::uint64_t n,
                                         std::uint32_t d, double c) {
  if (n == 0 || reports.empty()) {
    throw RangeError("sqkr_estimate: no reports");
  }
  const double strings = std::ldexp(1.0, b0);
  const double debias = (std::exp(eps0) + strings - 1.0) / std::expm1(eps0);
  const double scale =
      static_cast<double>(d) / (static_cast<double>(n) * b0) * debias;
  std::vector<double> out(d, 0.0);
  for (const SqkrReport& r : reports) {
    for (int j = 0; j < b0; ++j) {
      const std::uint32_t coord = r.coords[j];
      if (coord >= d) {
        throw ProtocolViolation("sqkr_estimate: coordinate " +
                                std::to_string(coord) + " out of range");
      }
      out[coord] += r.signs[j] ? c : -c;
    }
  }
  for (double& v : out) v *= scale;
  return out;
}

enum class PlanAccounting { kClosedForm, kRdp };

// Budget-splitting parameter selection: b0 = 1, T = floor(b / (ceil(log2 d)
// + 1)), delta1 = delta / 2T, delta2 = delta / 2, and eps0 the largest
// admissible value whose amplified, T-fold-composed budget stays at or below
// the target (bisection to 1e-9).  With PlanAccounting::kRdp the forward
// accounting uses the shuffle RDP curve composed over rounds instead.
inline ShufflePlan plan_shuffled_sqkr(
    const accountant::PrivacyBudget& target, double bit_budget,
    std::uint32_t d, std::uint64_t n, int b0 = 1,
    PlanAccounting accounting = PlanAccounting::kClosedForm) {
  target.validate();
  if (n <= 30) {
    throw InfeasibleError("plan_shuffled_sqkr: requires n > 30, got " +
                          std::to_string(n));
  }
  ShufflePlan plan;
  plan.b0 = b0;
  plan.target = target;
  const int slot_bits = (index_bits(d) + 1) * b0;
  plan.rounds = static_cast<int>(bit_budget / slot_bits);
  if (plan.rounds < 1) {
    throw InfeasibleError(
        "plan_shuffled_sqkr: bit budget " + std::to_string(bit_budget) +
        " below one round of " + std::to_string(slot_bits) + " bits");
  }
  plan.delta1 = target.delta / (2.0 * plan.rounds);
  plan.delta2 = target.delta / 2.0;

  const double eps0_cap =
      accountant::amplify_shuffle_max_eps0(n, plan.delta1);
  if (!(eps0_cap > 0.0)) {
    throw InfeasibleError(
        "plan_shuffled_sqkr: shuffle amplification bound "
        "ln(n/(16 ln(2/delta1))) is non-positive; n too small for delta1");
  }

  auto accounted = [&](double eps0) -> accountant::PrivacyBudget {
    if (accounting == PlanAccounting::kClosedForm) {
      const double per_round = accountant::amplify_shuffle(eps0, n, plan.delta1);
      return accountant::compose_advanced(per_round, plan.delta1, plan.rounds,
                                          plan.delta2);
    }
    const accountant::RdpCurve curve = accountant::shuffle_curve(
        eps0, n, accountant::RdpCurve::default_orders());
    const double eps = accountant::rdp_to_dp(
        accountant::rdp_scale(curve, plan.rounds), target.delta);
    return {eps, target.delta};
  };

  if (accounted(eps0_cap).eps <= target.eps) {
    plan.eps0 = eps0_cap;  // budget not binding; local cap binds
  } else {
    double lo = 0.0, hi = eps0_cap;
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      (accounted(mid).eps <= target.eps ? lo : hi) = mid;
    }
    plan.eps0 = lo;
  }
  if (!(plan.eps0 > 0.0)) {
    throw InfeasibleError(
        "plan_shuffled_sqkr: no positive eps0 meets the target budget");
  }
  plan.accounted = accounted(plan.eps0);
  return plan;
}

// Big-endian wire encoding of one shuffled round, used for bit accounting
// and golden transcripts.  Header: 16-bit round index, 32-bit client count;
// then per report and slot: ceil(log2 dim) coordinate bits and 1 sign bit.
inline std::vector<std::uint8_t> serialize_round(
    std::span<const SqkrReport> reports, std::uint16_t round_index,
    std::uint32_t dim) {
  BitWriter w;
  w.put(round_index, 16);
  w.put(static_cast<std::uint32_t>(reports.size()), 32);
  const int coord_bits = index_bits(dim);
  for (const SqkrReport& r : reports) {
    for (std::size_t j = 0; j < r.coords.size(); ++j) {
      w.put(r.coords[j], coord_bits);
      w.put(r.signs[j] ? 1 : 0, 1);
    }
  }
  return w.bytes();
}

inline std::vector<SqkrReport> deserialize_round(
    const std::vector<std::uint8_t>& bytes, std::uint32_t dim, int b0,
    std::uint16_t* round_index = nullptr) {
  BitReader reader(bytes);
  const std::uint16_t round = static_cast<std::uint16_t>(reader.get(16));
  if (round_index != nullptr) *round_index = round;
  const std::uint32_t count = static_cast<std::uint32_t>(reader.get(32));
  const int coord_bits = index_bits(dim);
  std::vector<SqkrReport> reports(count);
  for (SqkrReport& r : reports) {
    r.coords.resize(b0);
    r.signs.resize(b0);
    for (int j = 0; j < b0; ++j) {
      r.coords[j] = static_cast<std::uint32_t>(reader.get(coord_bits));
      if (r.coords[j] >= dim) {
        throw ProtocolViolation("deserialize_round: coordinate out of range");
      }
      r.signs[j] = reader.get(1) != 0;
    }
  }
  return reports;
}

struct ShuffleSeeds {
  std::uint64_t rounding = 0;
  std::uint64_t client = 0;       // per (round, client) randomizer streams
  std::uint64_t permutation = 0;  // shuffler-private

  static ShuffleSeeds derive(std::uint64_t master) {
    return {derive_seed(master, 0, "sqkr.rounding"),
            derive_seed(master, 0, "sqkr.client"),
            derive_seed(master, 0, "sqkr.permutation")};
  }
};

// Full shuffled-SQKR run over ||x_i||_2 <= c_bound vectors: Kashin encode
// and randomized-round once, then T independent rounds (fresh coordinate
// samples, fresh randomized-response draws, fresh permutation), average the
// round estimates and decode.  The server side only ever sees post-shuffle
// reports.  Bits per client are exact: T * b0 * (ceil(log2 D) + 1).
inline MeanEstimate shuffled_sqkr_run(const std::vector<std::vector<double>>& xs,
                                      double c_bound, const ShufflePlan& plan,
                                      const KashinFrame& frame,
                                      const ShuffleSeeds& seeds) {
  if (xs.empty()) throw RangeError("shuffled_sqkr_run: no clients");
  const std::uint64_t n = xs.size();
  const std::uint32_t big_d = frame.frame_dim();
  const double c = frame.coefficient_bound(c_bound);

  std::vector<SignVector> rounded(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::vector<double> coeffs =
        transforms::kashin_encode(xs[i], c_bound, frame);
    Rng round_rng = make_rng(seeds.rounding, i, "sqkr.round");
    rounded[i] = transforms::randomized_round(coeffs, c, round_rng);
  }

  std::vector<double> frame_mean(big_d, 0.0);
  TranscriptStats stats;
  stats.client_slots = n;
  for (int k = 0; k < plan.rounds; ++k) {
    std::vector<SqkrReport> reports;
    reports.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      Rng rng = make_rng(seeds.client,
                         static_cast<std::uint64_t>(k) * n + i, "sqkr.rr");
      reports.push_back(sqkr_randomize(rounded[i], plan.eps0, plan.b0, rng));
    }
    Rng perm_rng = make_rng(seeds.permutation, k, "sqkr.perm");
    reports = shuffle_round(std::move(reports), perm_rng);
    stats.bits_total +=
        n * static_cast<std::uint64_t>(plan.b0) * (index_bits(big_d) + 1);
    stats.messages_total += n;

    const std::vector<double> round_est =
        sqkr_estimate(reports, plan.eps0, plan.b0, n, big_d, c);
    for (std::uint32_t j = 0; j < big_d; ++j) {
      frame_mean[j] += round_est[j] / plan.rounds;
    }
  }

  MeanEstimate out;
  out.stats = stats;
  out.stats.accounted_eps = plan.accounted.eps;
  out.stats.accounted_delta = plan.accounted.delta;
  out.estimate = transforms::kashin_decode(frame_mean, frame);
  return out;
}

}  // namespace dpcomm::shuffle

#endif  // DPCOMM_SQKR_HPP_
