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

// Command-line driver: protocol sweeps (mean / freq / shuffle / sweep) from
// JSON configs, and direct privacy-accountant queries.  Exit codes:
// 0 success, 2 configuration error, 3 calibration infeasible at every grid
// point.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpcomm/accountant.hpp"
#include "dpcomm/config_io.hpp"
#include "dpcomm/errors.hpp"
#include "dpcomm/experiment.hpp"
#include "dpcomm/rdp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitInfeasible = 3;

void print_value(const std::string& name, double value) {
  std::cout << name << " = " << dpcomm::harness::format_sig12(value) << "\n";
}

struct SweepOptions {
  std::string config_path;
  std::string out_path = "-";
  std::string format = "csv";
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> accounting;
};

void add_sweep_options(CLI::App* cmd, SweepOptions* opts) {
  cmd->add_option("--config", opts->config_path, "JSON experiment config")
      ->required();
  cmd->add_option("--out", opts->out_path, "output path ('-' for stdout)");
  cmd->add_option("--format", opts->format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--trials", opts->trials, "override trial count");
  cmd->add_option("--seed", opts->seed, "override protocol seed");
  cmd->add_option("--accounting", opts->accounting, "override accounting")
      ->check(CLI::IsMember({"closed-form", "rdp"}));
}

dpcomm::harness::ExperimentConfig load_config(const SweepOptions& opts) {
  std::ifstream in(opts.config_path);
  if (!in) {
    throw dpcomm::ConfigError("cannot open config file: " + opts.config_path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  dpcomm::harness::ExperimentConfig cfg =
      dpcomm::harness::parse_experiment_config(buffer.str());
  if (opts.trials) cfg.trials = *opts.trials;
  if (opts.seed) cfg.protocol_seed = *opts.seed;
  if (opts.accounting) {
    cfg.accounting = *opts.accounting == "rdp"
                         ? dpcomm::harness::Accounting::kRdp
                         : dpcomm::harness::Accounting::kClosedForm;
  }
  cfg.validate();
  return cfg;
}

int run_sweep_command(const SweepOptions& opts,
                      const std::vector<dpcomm::harness::Protocol>& allowed) {
  using dpcomm::harness::Protocol;
  const dpcomm::harness::ExperimentConfig cfg = load_config(opts);
  if (!allowed.empty()) {
    bool ok = false;
    for (Protocol p : allowed) ok = ok || cfg.protocol == p;
    if (!ok) {
      throw dpcomm::ConfigError("protocol '" +
                                dpcomm::harness::protocol_name(cfg.protocol) +
                                "' not valid for this subcommand");
    }
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (opts.out_path != "-") {
    file.open(opts.out_path);
    if (!file) {
      throw dpcomm::ConfigError("cannot open output file: " + opts.out_path);
    }
    out = &file;
  }

  std::vector<dpcomm::harness::SweepRow> rows;
  if (opts.format == "csv") {
    *out << dpcomm::harness::kCsvHeader << "\n";
    out->flush();
    rows = dpcomm::harness::run_sweep(
        cfg, [&](const dpcomm::harness::SweepRow& row) {
          dpcomm::harness::write_csv_row(*out, row);
          out->flush();
        });
  } else {
    rows = dpcomm::harness::run_sweep(cfg);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
      arr.push_back(dpcomm::harness::row_to_json(row));
    }
    *out << arr.dump(2) << "\n";
  }

  bool all_infeasible = true;
  for (const auto& row : rows) all_infeasible = all_infeasible && row.infeasible;
  return all_infeasible ? kExitInfeasible : kExitOk;
}

void add_accountant_commands(CLI::App* acc) {
  using dpcomm::accountant::PrivacyBudget;

  auto* gs = acc->add_subcommand("gaussian-sigma",
                                 "sigma^2 for the Gaussian mechanism");
  auto gs_opts = std::make_shared<std::vector<double>>(3);
  gs->add_option("--sensitivity", (*gs_opts)[0])->required();
  gs->add_option("--eps", (*gs_opts)[1])->required();
  gs->add_option("--delta", (*gs_opts)[2])->required();
  gs->callback([gs_opts] {
    print_value("sigma2", dpcomm::accountant::gaussian_sigma2(
                              (*gs_opts)[0],
                              PrivacyBudget{(*gs_opts)[1], (*gs_opts)[2]}));
  });

  auto* ap = acc->add_subcommand("amplify-poisson",
                                 "Poisson subsampling amplification");
  auto ap_opts = std::make_shared<std::vector<double>>(3);
  ap->add_option("--eps", (*ap_opts)[0])->required();
  ap->add_option("--delta", (*ap_opts)[1])->required();
  ap->add_option("--gamma", (*ap_opts)[2])->required();
  ap->callback([ap_opts] {
    const PrivacyBudget out = dpcomm::accountant::amplify_poisson(
        (*ap_opts)[0], (*ap_opts)[1], (*ap_opts)[2]);
    print_value("eps", out.eps);
    print_value("delta", out.delta);
  });

  auto* ca = acc->add_subcommand("compose-advanced", "advanced composition");
  auto ca_opts = std::make_shared<std::vector<double>>(4);
  auto ca_k = std::make_shared<std::uint64_t>(1);
  ca->add_option("--eps", (*ca_opts)[0])->required();
  ca->add_option("--delta", (*ca_opts)[1])->required();
  ca->add_option("--k", *ca_k)->required();
  ca->add_option("--delta-tilde", (*ca_opts)[2])->required();
  ca->callback([ca_opts, ca_k] {
    const PrivacyBudget out = dpcomm::accountant::compose_advanced(
        (*ca_opts)[0], (*ca_opts)[1], *ca_k, (*ca_opts)[2]);
    print_value("eps", out.eps);
    print_value("delta", out.delta);
  });

  auto* cal = acc->add_subcommand(
      "calibrate", "subsampled-Gaussian noise calibration chain");
  auto cal_opts = std::make_shared<std::vector<double>>(4);
  auto cal_coords = std::make_shared<std::uint64_t>(1);
  auto cal_exact = std::make_shared<bool>(false);
  cal->add_option("--eps", (*cal_opts)[0])->required();
  cal->add_option("--delta", (*cal_opts)[1])->required();
  cal->add_option("--gamma", (*cal_opts)[2])->required();
  cal->add_option("--coords", *cal_coords)->required();
  cal->add_option("--sensitivity", (*cal_opts)[3])->required();
  cal->add_flag("--exact-eps2", *cal_exact,
                "solve the composition equation by bisection instead of the "
                "quadratic relaxation");
  cal->callback([cal_opts, cal_coords, cal_exact] {
    const dpcomm::accountant::NoiseCalibration out =
        dpcomm::accountant::calibrate_subsampled_gaussian(
            PrivacyBudget{(*cal_opts)[0], (*cal_opts)[1]}, (*cal_opts)[2],
            *cal_coords, (*cal_opts)[3], *cal_exact);
    print_value("sigma2_sum", out.sigma2_sum);
    print_value("eps1", out.eps1);
    print_value("delta1", out.delta1);
    print_value("eps2", out.eps2);
    print_value("delta2", out.delta2);
    const PrivacyBudget replay =
        dpcomm::accountant::audit_calibration(out, (*cal_opts)[1]);
    print_value("audit_eps", replay.eps);
    print_value("audit_delta", replay.delta);
  });

  auto* rg = acc->add_subcommand("rdp-gaussian", "Gaussian RDP at one order");
  auto rg_opts = std::make_shared<std::vector<double>>(3);
  rg->add_option("--sensitivity", (*rg_opts)[0])->required();
  rg->add_option("--sigma", (*rg_opts)[1])->required();
  rg->add_option("--alpha", (*rg_opts)[2])->required();
  rg->callback([rg_opts] {
    print_value("eps_alpha", dpcomm::accountant::rdp_gaussian(
                                 (*rg_opts)[0], (*rg_opts)[1], (*rg_opts)[2]));
  });

  auto* rsg = acc->add_subcommand("rdp-subsampled-gaussian",
                                  "subsampled Gaussian RDP at one order");
  auto rsg_opts = std::make_shared<std::vector<double>>(2);
  auto rsg_alpha = std::make_shared<int>(2);
  rsg->add_option("--gamma", (*rsg_opts)[0])->required();
  rsg->add_option("--noise-multiplier", (*rsg_opts)[1])->required();
  rsg->add_option("--alpha", *rsg_alpha)->required();
  rsg->callback([rsg_opts, rsg_alpha] {
    print_value("eps_alpha", dpcomm::accountant::rdp_subsampled_gaussian(
                                 (*rsg_opts)[0], (*rsg_opts)[1], *rsg_alpha));
  });

  auto* racc = acc->add_subcommand(
      "rdp-account",
      "compose a subsampled-Gaussian curve and convert to (eps, delta)");
  auto racc_opts = std::make_shared<std::vector<double>>(3);
  auto racc_coords = std::make_shared<std::uint64_t>(1);
  racc->add_option("--gamma", (*racc_opts)[0])->required();
  racc->add_option("--noise-multiplier", (*racc_opts)[1])->required();
  racc->add_option("--coords", *racc_coords)->required();
  racc->add_option("--delta", (*racc_opts)[2])->required();
  racc->callback([racc_opts, racc_coords] {
    using namespace dpcomm::accountant;
    const RdpCurve curve =
        (*racc_opts)[0] >= 1.0
            ? gaussian_curve((*racc_opts)[1], RdpCurve::default_orders())
            : subsampled_gaussian_curve((*racc_opts)[0], (*racc_opts)[1],
                                        RdpCurve::default_integer_orders());
    print_value("eps",
                rdp_to_dp(rdp_scale(curve, static_cast<double>(*racc_coords)),
                          (*racc_opts)[2]));
  });

  auto* as = acc->add_subcommand("amplify-shuffle",
                                 "privacy amplification by shuffling");
  auto as_opts = std::make_shared<std::vector<double>>(2);
  auto as_n = std::make_shared<std::uint64_t>(0);
  as->add_option("--eps0", (*as_opts)[0])->required();
  as->add_option("--n", *as_n)->required();
  as->add_option("--delta", (*as_opts)[1])->required();
  as->callback([as_opts, as_n] {
    print_value("eps", dpcomm::accountant::amplify_shuffle(
                           (*as_opts)[0], *as_n, (*as_opts)[1]));
  });

  auto* rs = acc->add_subcommand("rdp-shuffle", "shuffle RDP at one order");
  auto rs_opts = std::make_shared<std::vector<double>>(2);
  auto rs_n = std::make_shared<std::uint64_t>(0);
  rs->add_option("--eps0", (*rs_opts)[0])->required();
  rs->add_option("--n", *rs_n)->required();
  rs->add_option("--alpha", (*rs_opts)[1])->required();
  rs->callback([rs_opts, rs_n] {
    print_value("eps_alpha", dpcomm::accountant::rdp_shuffle(
                                 (*rs_opts)[0], *rs_n, (*rs_opts)[1]));
  });

  acc->require_subcommand(1);
}

}  // namespace

int main(int argc, char** argv) {
  using dpcomm::harness::Protocol;
  CLI::App app{
      "communication-constrained differentially private estimation"};
  app.require_subcommand(1);

  SweepOptions mean_opts, freq_opts, shuffle_opts, sweep_opts;
  auto* mean_cmd =
      app.add_subcommand("mean", "mean-estimation protocol sweep");
  add_sweep_options(mean_cmd, &mean_opts);
  auto* freq_cmd =
      app.add_subcommand("freq", "frequency-estimation protocol sweep");
  add_sweep_options(freq_cmd, &freq_opts);
  auto* shuffle_cmd =
      app.add_subcommand("shuffle", "shuffled-protocol sweep");
  add_sweep_options(shuffle_cmd, &shuffle_opts);
  auto* sweep_cmd =
      app.add_subcommand("sweep", "sweep whatever protocol the config names");
  add_sweep_options(sweep_cmd, &sweep_opts);

  auto* acc = app.add_subcommand("accountant", "privacy budget queries");
  add_accountant_commands(acc);

  // The accountant callbacks run inside parse(), so domain errors from
  // either stage funnel through one handler chain.
  try {
    app.parse(argc, argv);
    if (mean_cmd->parsed()) {
      return run_sweep_command(
          mean_opts, {Protocol::kCsgm, Protocol::kCsgmPreselect,
                      Protocol::kL2Pipeline, Protocol::kGaussianBaseline});
    }
    if (freq_cmd->parsed()) {
      return run_sweep_command(freq_opts, {Protocol::kRhr});
    }
    if (shuffle_cmd->parsed()) {
      return run_sweep_command(
          shuffle_opts,
          {Protocol::kShuffledSqkr, Protocol::kSqkrLdpBaseline});
    }
    if (sweep_cmd->parsed()) {
      return run_sweep_command(sweep_opts, {});
    }
    return kExitOk;  // accountant subcommands ran via callbacks
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  } catch (const dpcomm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const dpcomm::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
