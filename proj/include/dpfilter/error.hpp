// Copyright 2026 The dpfilter Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpfilter {

enum class ErrorCode {
  // lti
  kUnstableSystem,
  kLyapunovFailure,
  kDimensionMismatch,
  kImproperTransferFunction,
  // privacy
  kInvalidDelta,
  kInvalidPrivacySpec,
  // sensitivity
  kNotDiagonal,
  kHorizonExceeded,
  kOracleTooLarge,
  // spectral
  kNotFactorizable,
  kFitFailed,
  kNotPositiveDefinite,
  kFactorizationStalled,
  // zfe / df
  kUnstableInverse,
  // lms
  kDegenerateObjective,
  kOptimizerStalled,
  // markov
  kNotErgodic,
  // sim
  kMissingForecastModel,
  kInsufficientSteps,
  // cli
  kConfigError,
  kIoError,
};

// "module.Name", e.g. "privacy.InvalidDelta".
std::string_view error_name(ErrorCode code);

// Process exit status used by the command line tool.
// 2: bad configuration, 3: numerical failure, 4: infeasible design.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }
  std::string_view name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace dpfilter
