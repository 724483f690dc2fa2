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

#ifndef DPCOMM_CONFIG_IO_HPP_
#define DPCOMM_CONFIG_IO_HPP_

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpcomm/errors.hpp"
#include "dpcomm/experiment.hpp"

// JSON config files mirror ExperimentConfig field names (snake_case); sweep
// output is CSV (kCsvHeader) or a JSON array with identical keys.
namespace dpcomm::harness {

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig cfg;
  try {
    cfg.protocol = protocol_from_name(j.at("protocol").get<std::string>());
    cfg.n = j.at("n").get<std::uint64_t>();
    cfg.d = j.at("d").get<std::uint32_t>();
    if (j.contains("b")) cfg.b = j.at("b").get<double>();
    if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
    cfg.eps_grid = j.at("eps_grid").get<std::vector<double>>();
    cfg.delta = j.at("delta").get<double>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<std::uint64_t>();
    if (j.contains("data_seed")) {
      cfg.data_seed = j.at("data_seed").get<std::uint64_t>();
    }
    if (j.contains("protocol_seed")) {
      cfg.protocol_seed = j.at("protocol_seed").get<std::uint64_t>();
    }
    if (j.contains("accounting")) {
      const std::string a = j.at("accounting").get<std::string>();
      if (a == "closed-form") {
        cfg.accounting = Accounting::kClosedForm;
      } else if (a == "rdp") {
        cfg.accounting = Accounting::kRdp;
      } else {
        throw ConfigError("config: accounting must be closed-form or rdp");
      }
    }
    if (j.contains("distribution")) {
      const std::string dist = j.at("distribution").get<std::string>();
      if (dist == "uniform") {
        cfg.distribution = ItemDistribution::kUniform;
      } else if (dist == "zipf") {
        cfg.distribution = ItemDistribution::kZipf;
      } else {
        throw ConfigError("config: distribution must be uniform or zipf");
      }
    }
    if (j.contains("zipf_s")) cfg.zipf_s = j.at("zipf_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: invalid JSON");
  return parse_experiment_config(j);
}

// Non-finite values become JSON null.
inline nlohmann::json row_to_json(const SweepRow& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
  };
  return nlohmann::json{{"protocol", r.protocol},
                        {"n", r.n},
                        {"d", r.d},
                        {"b", num(r.b)},
                        {"gamma", num(r.gamma)},
                        {"eps_target", num(r.eps_target)},
                        {"delta", num(r.delta)},
                        {"eps_accounted_closed", num(r.eps_closed)},
                        {"eps_accounted_rdp", num(r.eps_rdp)},
                        {"mse_mean", num(r.mse_mean)},
                        {"mse_stderr", num(r.mse_stderr)},
                        {"l1_mean", num(r.l1_mean)},
                        {"bits_total", r.bits_total},
                        {"bits_per_client", num(r.bits_per_client)},
                        {"trials", r.trials},
                        {"seed", r.seed},
                        {"infeasible", r.infeasible}};
}

}  // namespace dpcomm::harness

#endif  // DPCOMM_CONFIG_IO_HPP_
