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

#ifndef DPCOMM_EXPERIMENT_HPP_
#define DPCOMM_EXPERIMENT_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpcomm/accountant.hpp"
#include "dpcomm/errors.hpp"
#include "dpcomm/freq_estimation.hpp"
#include "dpcomm/kashin.hpp"
#include "dpcomm/mean_estimation.hpp"
#include "dpcomm/rdp.hpp"
#include "dpcomm/rng.hpp"
#include "dpcomm/sqkr.hpp"
#include "dpcomm/synthetic.hpp"
#include "dpcomm/transcript.hpp"

// Experiment orchestration: sweeps a protocol over an epsilon grid on
// synthetic data, measuring Monte-Carlo estimation error, exact
// communication bits, and the privacy budget accounted through both the
// closed-form chain and RDP.  Trial seeds are derived from (protocol_seed,
// trial index, label), so results do not depend on execution order.
namespace dpcomm::harness {

enum class Protocol {
  kCsgm,
  kCsgmPreselect,
  kL2Pipeline,
  kRhr,
  kShuffledSqkr,
  kGaussianBaseline,
  kSqkrLdpBaseline,
};

enum class Accounting { kClosedForm, kRdp };

inline std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kCsgm: return "csgm";
    case Protocol::kCsgmPreselect: return "csgm-preselect";
    case Protocol::kL2Pipeline: return "l2-pipeline";
    case Protocol::kRhr: return "rhr";
    case Protocol::kShuffledSqkr: return "shuffled-sqkr";
    case Protocol::kGaussianBaseline: return "gaussian-baseline";
    case Protocol::kSqkrLdpBaseline: return "sqkr-ldp-baseline";
  }
  return "?";
}

inline Protocol protocol_from_name(const std::string& name) {
  for (Protocol p :
       {Protocol::kCsgm, Protocol::kCsgmPreselect, Protocol::kL2Pipeline,
        Protocol::kRhr, Protocol::kShuffledSqkr, Protocol::kGaussianBaseline,
        Protocol::kSqkrLdpBaseline}) {
    if (protocol_name(p) == name) return p;
  }
  throw ConfigError("unknown protocol: " + name);
}

struct ExperimentConfig {
  Protocol protocol = Protocol::kCsgm;
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  std::optional<double> b;      // bit budget per client
  std::optional<double> gamma;  // alternative to b for csgm
  std::vector<double> eps_grid;
  double delta = 1e-5;
  std::uint64_t trials = 100;
  std::uint64_t data_seed = 1;
  std::uint64_t protocol_seed = 2;
  Accounting accounting = Accounting::kClosedForm;
  ItemDistribution distribution = ItemDistribution::kUniform;
  double zipf_s = 1.1;

  bool is_freq() const { return protocol == Protocol::kRhr; }

  void validate() const {
    if (n < 1 || d < 1) throw ConfigError("config: n and d must be >= 1");
    if (trials < 1) throw ConfigError("config: trials must be >= 1");
    if (eps_grid.empty()) throw ConfigError("config: eps_grid is empty");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      if (!(eps_grid[i] > 0.0)) throw ConfigError("config: eps must be > 0");
      if (i > 0 && !(eps_grid[i] > eps_grid[i - 1])) {
        throw ConfigError("config: eps_grid must be strictly increasing");
      }
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ConfigError("config: delta must be in (0, 1)");
    }
    switch (protocol) {
      case Protocol::kCsgm:
        if (b.has_value() == gamma.has_value()) {
          throw ConfigError("config: csgm needs exactly one of b / gamma");
        }
        break;
      case Protocol::kGaussianBaseline:
        if (b.has_value() || (gamma.has_value() && *gamma != 1.0)) {
          throw ConfigError(
              "config: gaussian-baseline fixes gamma = 1 and takes no b");
        }
        break;
      case Protocol::kSqkrLdpBaseline:
        break;  // b ignored; one round of b0 = 1 slots
      default:
        if (!b.has_value() || gamma.has_value()) {
          throw ConfigError("config: " + protocol_name(protocol) +
                            " needs b (and no gamma)");
        }
    }
    if (gamma.has_value() && !(*gamma > 0.0 && *gamma <= 1.0)) {
      throw ConfigError("config: gamma must be in (0, 1]");
    }
    if (b.has_value() && !(*b > 0.0)) {
      throw ConfigError("config: b must be > 0");
    }
  }
};

// One grid point of a sweep, aggregated over all trials.
struct SweepRow {
  std::string protocol;
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  double b = 0.0;
  double gamma = 1.0;
  double eps_target = 0.0;
  double delta = 0.0;
  double eps_closed = std::numeric_limits<double>::quiet_NaN();
  double eps_rdp = std::numeric_limits<double>::quiet_NaN();
  double mse_mean = std::numeric_limits<double>::quiet_NaN();
  double mse_stderr = std::numeric_limits<double>::quiet_NaN();
  double l1_mean = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t bits_total = 0;
  double bits_per_client = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  bool infeasible = false;
};

namespace detail {

// Closed-form chain epsilon certified by an actually-used noise scale:
// invert the Gaussian form for eps1, then push through Poisson amplification
// and advanced composition.  +inf when the chain cannot certify (eps1 would
// exceed its validity range).
inline double closed_form_epsilon(double sigma2_sum, double sensitivity,
                                  double gamma, std::uint64_t coords,
                                  double delta) {
  const double inf = std::numeric_limits<double>::infinity();
  if (!(sigma2_sum > 0.0)) return inf;
  const double delta2 = delta / (2.0 * static_cast<double>(coords));
  const double delta1 = delta2 / gamma;
  if (delta1 >= 1.0) return inf;
  const double eps1 =
      sensitivity * std::sqrt(2.0 * std::log(1.25 / delta1) / sigma2_sum);
  if (eps1 >= 1.0) return inf;
  const accountant::PrivacyBudget amplified =
      accountant::amplify_poisson(eps1, delta1, gamma);
  return accountant::compose_advanced(amplified.eps, amplified.delta, coords,
                                      delta / 2.0)
      .eps;
}

// RDP-accounted epsilon of the same release.
inline double rdp_epsilon(double sigma2_sum, double sensitivity, double gamma,
                          std::uint64_t coords, double delta) {
  if (!(sigma2_sum > 0.0)) return std::numeric_limits<double>::infinity();
  const double m = std::sqrt(sigma2_sum) / sensitivity;
  const accountant::RdpCurve curve =
      gamma >= 1.0
          ? accountant::gaussian_curve(m, accountant::RdpCurve::default_orders())
          : accountant::subsampled_gaussian_curve(
                gamma, m, accountant::RdpCurve::default_integer_orders());
  return accountant::rdp_to_dp(
      accountant::rdp_scale(curve, static_cast<double>(coords)), delta);
}

// Calibrate sigma2 at sum scale for a subsampled-Gaussian release through
// the configured accounting route.
inline accountant::NoiseCalibration calibrate_gaussian_family(
    const accountant::PrivacyBudget& budget, double gamma,
    std::uint64_t coords, double sensitivity, Accounting accounting) {
  if (accounting == Accounting::kClosedForm) {
    return accountant::calibrate_subsampled_gaussian(budget, gamma, coords,
                                                     sensitivity);
  }
  const double m = accountant::calibrate_noise_multiplier_rdp(
      budget, gamma,
      coords);
  accountant::NoiseCalibration cal;
  cal.gamma = gamma;
  cal.coords = coords;
  cal.sensitivity = sensitivity;
  cal.sigma2_sum = m * m * sensitivity * sensitivity;
  return cal;
}

struct ErrorAccumulator {
  double sum_sq = 0.0;
  double sum_sq2 = 0.0;  // of per-trial squared errors, for the stderr
  double sum_l1 = 0.0;
  std::uint64_t count = 0;

  void add(const std::vector<double>& estimate,
           const std::vector<double>& truth, std::size_t dims) {
    double sq = 0.0, l1 = 0.0;
    for (std::size_t j = 0; j < dims; ++j) {
      const double e = estimate[j] - truth[j];
      sq += e * e;
      l1 += std::abs(e);
    }
    sum_sq += sq;
    sum_sq2 += sq * sq;
    sum_l1 += l1;
    ++count;
  }

  void finish(SweepRow& row) const {
    const double k = static_cast<double>(count);
    row.mse_mean = sum_sq / k;
    const double var = std::max(0.0, sum_sq2 / k - row.mse_mean * row.mse_mean);
    row.mse_stderr = count > 1 ? std::sqrt(var / (k - 1.0)) : 0.0;
    row.l1_mean = sum_l1 / k;
  }
};

}  // namespace detail

using RowCallback = std::function<void(const SweepRow&)>;

// Run the configured sweep; returns one row per epsilon grid point and
// invokes on_row as each row completes so partial runs remain usable.
// Calibration infeasibility at a grid point marks that row infeasible and
// continues.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                       const RowCallback& on_row = {}) {
  config.validate();
  std::vector<SweepRow> rows;

  // Shared synthetic dataset and, for the Kashin-based protocols, a fixed
  // public frame.
  const bool needs_mean_data = !config.is_freq();
  std::vector<std::vector<double>> xs;
  std::vector<double> mean_truth;
  std::vector<transforms::SignVector> sign_data;
  FreqDataset freq_data;
  const double sign_mag = 1.0 / std::sqrt(static_cast<double>(config.d));

  if (needs_mean_data) {
    xs = gen_synthetic_mean(config.n, config.d, config.data_seed);
    mean_truth.assign(config.d, 0.0);
    for (const auto& x : xs) {
      for (std::uint32_t j = 0; j < config.d; ++j) {
        mean_truth[j] += x[j] / static_cast<double>(config.n);
      }
    }
    sign_data = to_sign_vectors(xs, sign_mag);
  } else {
    freq_data = gen_synthetic_freq(config.n, config.d, config.distribution,
                                   config.zipf_s, config.data_seed);
  }

  const std::uint32_t pad_d = next_power_of_two(config.d);
  std::optional<transforms::KashinFrame> frame;
  std::vector<std::vector<double>> xs_padded;
  if (config.protocol == Protocol::kL2Pipeline ||
      config.protocol == Protocol::kShuffledSqkr ||
      config.protocol == Protocol::kSqkrLdpBaseline) {
    frame.emplace(pad_d, derive_seed(config.protocol_seed, 0, "frame"));
    xs_padded = xs;
    for (auto& x : xs_padded) x.resize(pad_d, 0.0);
  }

  for (const double eps : config.eps_grid) {
    SweepRow row;
    row.protocol = protocol_name(config.protocol);
    row.n = config.n;
    row.d = config.d;
    row.eps_target = eps;
    row.delta = config.delta;
    row.trials = config.trials;
    row.seed = config.protocol_seed;
    const accountant::PrivacyBudget budget{eps, config.delta};

    try {
      detail::ErrorAccumulator acc;
      TranscriptStats stats;

      switch (config.protocol) {
        case Protocol::kCsgm:
        case Protocol::kGaussianBaseline: {
          const double gamma =
              config.protocol == Protocol::kGaussianBaseline
                  ? 1.0
                  : (config.gamma ? *config.gamma
                                  : std::min(1.0, *config.b / config.d));
          row.gamma = gamma;
          row.b = gamma * config.d;
          accountant::NoiseCalibration cal = detail::calibrate_gaussian_family(
              budget, gamma, config.d, sign_mag, config.accounting);
          cal.resolve_mean_scale(config.n);
          mean::CsgmConfig run_cfg{config.n, config.d, gamma, budget,
                                   sign_mag, 0};
          for (std::uint64_t t = 0; t < config.trials; ++t) {
            run_cfg.shared_seed =
                derive_seed(config.protocol_seed, t, "trial.mask");
            const mean::MeanEstimate est = mean::csgm_run(
                sign_data, run_cfg,
                derive_seed(config.protocol_seed, t, "trial.noise"), cal);
            acc.add(est.estimate, mean_truth, config.d);
            stats.merge(est.stats);
          }
          row.eps_closed = detail::closed_form_epsilon(
              cal.sigma2_sum, sign_mag, gamma, config.d, config.delta);
          row.eps_rdp = detail::rdp_epsilon(cal.sigma2_sum, sign_mag, gamma,
                                            config.d, config.delta);
          break;
        }

        case Protocol::kCsgmPreselect: {
          const std::uint32_t d_prime =
              mean::select_dprime(config.n, *config.b, config.d, budget);
          const double gamma = std::min(1.0, *config.b / d_prime);
          row.gamma = gamma;
          row.b = gamma * d_prime;
          accountant::NoiseCalibration cal = detail::calibrate_gaussian_family(
              budget, gamma, d_prime, sign_mag, config.accounting);
          cal.resolve_mean_scale(config.n);
          for (std::uint64_t t = 0; t < config.trials; ++t) {
            const mean::MeanEstimate est = mean::csgm_preselect_run(
                sign_data, *config.b, budget,
                mean::PreselectSeeds::derive(
                    derive_seed(config.protocol_seed, t, "trial")),
                cal);
            acc.add(est.estimate, mean_truth, config.d);
            stats.merge(est.stats);
          }
          row.eps_closed = detail::closed_form_epsilon(
              cal.sigma2_sum, sign_mag, gamma, d_prime, config.delta);
          row.eps_rdp = detail::rdp_epsilon(cal.sigma2_sum, sign_mag, gamma,
                                            d_prime, config.delta);
          break;
        }

        case Protocol::kL2Pipeline: {
          const std::uint32_t big_d = frame->frame_dim();
          const double c = frame->coefficient_bound(1.0);
          const std::uint32_t d_prime =
              mean::select_dprime(config.n, *config.b, big_d, budget);
          const double gamma = std::min(1.0, *config.b / d_prime);
          row.gamma = gamma;
          row.b = gamma * d_prime;
          accountant::NoiseCalibration cal = detail::calibrate_gaussian_family(
              budget, gamma, d_prime, c, config.accounting);
          cal.resolve_mean_scale(config.n);
          for (std::uint64_t t = 0; t < config.trials; ++t) {
            const mean::MeanEstimate est = mean::l2_mean_pipeline(
                xs_padded, 1.0, *config.b, budget, *frame,
                mean::PipelineSeeds::derive(
                    derive_seed(config.protocol_seed, t, "trial")),
                cal);
            acc.add(est.estimate, mean_truth, config.d);
            stats.merge(est.stats);
          }
          row.eps_closed = detail::closed_form_epsilon(
              cal.sigma2_sum, c, gamma, d_prime, config.delta);
          row.eps_rdp =
              detail::rdp_epsilon(cal.sigma2_sum, c, gamma, d_prime,
                                  config.delta);
          break;
        }

        case Protocol::kRhr: {
          const int bits = static_cast<int>(*config.b);
          const freq::RhrShape shape = freq::RhrShape::create(pad_d, bits);
          row.b = bits;
          row.gamma = 1.0 / shape.chunk_size;
          const double sens = freq::rhr_sensitivity(config.n, shape.chunk_size);
          double sigma2 = 0.0;
          if (config.accounting == Accounting::kClosedForm) {
            sigma2 = freq::rhr_calibrate(budget, config.n, pad_d, bits)
                         .sigma2_sum;
          } else {
            const double m = accountant::calibrate_noise_multiplier_rdp(
                budget, row.gamma, shape.chunk_size);
            sigma2 = m * m * sens * sens;
          }
          std::vector<freq::OneHotItem> items = freq_data.items;
          for (auto& item : items) item.domain = pad_d;
          for (std::uint64_t t = 0; t < config.trials; ++t) {
            const freq::FreqEstimate est =
                freq::rhr_run(items, budget, bits,
                              derive_seed(config.protocol_seed, t, "trial"),
                              sigma2);
            acc.add(est.estimate, freq_data.frequencies, config.d);
            stats.merge(est.stats);
          }
          row.eps_closed = detail::closed_form_epsilon(
              sigma2, sens, row.gamma, shape.chunk_size, config.delta);
          row.eps_rdp = detail::rdp_epsilon(sigma2, sens, row.gamma,
                                            shape.chunk_size, config.delta);
          break;
        }

        case Protocol::kShuffledSqkr:
        case Protocol::kSqkrLdpBaseline: {
          const std::uint32_t big_d = frame->frame_dim();
          shuffle::ShufflePlan plan;
          if (config.protocol == Protocol::kShuffledSqkr) {
            plan = shuffle::plan_shuffled_sqkr(
                budget, *config.b, big_d, config.n, 1,
                config.accounting == Accounting::kClosedForm
                    ? shuffle::PlanAccounting::kClosedForm
                    : shuffle::PlanAccounting::kRdp);
          } else {
            // Pure local DP comparator: one round, raw eps0 = target eps,
            // no shuffle amplification credit.
            plan.rounds = 1;
            plan.b0 = 1;
            plan.eps0 = eps;
            plan.delta1 = config.delta;
            plan.delta2 = 0.0;
            plan.target = budget;
            plan.accounted = {eps, 0.0};
          }
          row.gamma = 1.0;
          row.b = static_cast<double>(plan.bits_per_client(big_d));
          for (std::uint64_t t = 0; t < config.trials; ++t) {
            const mean::MeanEstimate est = shuffle::shuffled_sqkr_run(
                xs_padded, 1.0, plan, *frame,
                shuffle::ShuffleSeeds::derive(
                    derive_seed(config.protocol_seed, t, "trial")));
            acc.add(est.estimate, mean_truth, config.d);
            stats.merge(est.stats);
          }
          if (config.protocol == Protocol::kSqkrLdpBaseline) {
            row.eps_closed = plan.eps0;
            row.eps_rdp = plan.eps0;
          } else {
            try {
              const double per_round = accountant::amplify_shuffle(
                  plan.eps0, config.n, plan.delta1);
              row.eps_closed =
                  accountant::compose_advanced(per_round, plan.delta1,
                                               plan.rounds, plan.delta2)
                      .eps;
            } catch (const InfeasibleError&) {
              row.eps_closed = std::numeric_limits<double>::infinity();
            }
            try {
              const accountant::RdpCurve curve = accountant::shuffle_curve(
                  plan.eps0, config.n, accountant::RdpCurve::default_orders());
              row.eps_rdp = accountant::rdp_to_dp(
                  accountant::rdp_scale(curve, plan.rounds), config.delta);
            } catch (const InfeasibleError&) {
              row.eps_rdp = std::numeric_limits<double>::infinity();
            }
          }
          break;
        }
      }

      acc.finish(row);
      row.bits_total = stats.bits_total;
      row.bits_per_client = stats.bits_per_client_mean();
    } catch (const InfeasibleError&) {
      row.infeasible = true;
    }

    rows.push_back(row);
    if (on_row) on_row(row);
  }
  return rows;
}

// ---- serialization ---------------------------------------------------

inline std::string format_sig12(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "protocol,n,d,b,gamma,eps_target,delta,eps_accounted_closed,"
    "eps_accounted_rdp,mse_mean,mse_stderr,l1_mean,bits_total,"
    "bits_per_client,trials,seed,infeasible";

inline void write_csv_row(std::ostream& os, const SweepRow& r) {
  os << r.protocol << ',' << r.n << ',' << r.d << ',' << format_sig12(r.b)
     << ',' << format_sig12(r.gamma) << ',' << format_sig12(r.eps_target)
     << ',' << format_sig12(r.delta) << ',' << format_sig12(r.eps_closed)
     << ',' << format_sig12(r.eps_rdp) << ',' << format_sig12(r.mse_mean)
     << ',' << format_sig12(r.mse_stderr) << ',' << format_sig12(r.l1_mean)
     << ',' << r.bits_total << ',' << format_sig12(r.bits_per_client) << ','
     << r.trials << ',' << r.seed << ',' << (r.infeasible ? 1 : 0) << '\n';
}

}  // namespace dpcomm::harness

#endif  // DPCOMM_EXPERIMENT_HPP_
