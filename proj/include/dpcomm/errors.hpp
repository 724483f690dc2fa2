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

#ifndef DPCOMM_ERRORS_HPP_
#define DPCOMM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpcomm {

// Shape/size violations (non-power-of-two transform length, mismatched
// frame dimensions, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scalar parameter outside the range a formula is valid for.
class RangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested privacy/communication target cannot be met; the message names
// the violated constraint.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative routine did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A received report violates the protocol (out-of-range coordinate, bad
// chunk index, ...).
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad experiment configuration (CLI / config file level).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpcomm

#endif  // DPCOMM_ERRORS_HPP_
