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

#include "dpfilter/error.hpp"

namespace dpfilter {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnstableSystem: return "lti.UnstableSystem";
    case ErrorCode::kLyapunovFailure: return "lti.LyapunovFailure";
    case ErrorCode::kDimensionMismatch: return "lti.DimensionMismatch";
    case ErrorCode::kImproperTransferFunction:
      return "lti.ImproperTransferFunction";
    case ErrorCode::kInvalidDelta: return "privacy.InvalidDelta";
    case ErrorCode::kInvalidPrivacySpec: return "privacy.InvalidPrivacySpec";
    case ErrorCode::kNotDiagonal: return "sensitivity.NotDiagonal";
    case ErrorCode::kHorizonExceeded: return "sensitivity.HorizonExceeded";
    case ErrorCode::kOracleTooLarge: return "sensitivity.OracleTooLarge";
    case ErrorCode::kNotFactorizable: return "spectral.NotFactorizable";
    case ErrorCode::kFitFailed: return "spectral.FitFailed";
    case ErrorCode::kNotPositiveDefinite: return "spectral.NotPositiveDefinite";
    case ErrorCode::kFactorizationStalled:
      return "spectral.FactorizationStalled";
    case ErrorCode::kUnstableInverse: return "zfe.UnstableInverse";
    case ErrorCode::kDegenerateObjective: return "lms.DegenerateObjective";
    case ErrorCode::kOptimizerStalled: return "lms.OptimizerStalled";
    case ErrorCode::kNotErgodic: return "markov.NotErgodic";
    case ErrorCode::kMissingForecastModel: return "sim.MissingForecastModel";
    case ErrorCode::kInsufficientSteps: return "sim.InsufficientSteps";
    case ErrorCode::kConfigError: return "cli.ConfigError";
    case ErrorCode::kIoError: return "cli.IoError";
  }
  return "unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLyapunovFailure:
    case ErrorCode::kHorizonExceeded:
    case ErrorCode::kFitFailed:
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kFactorizationStalled:
    case ErrorCode::kOptimizerStalled:
      return 3;
    case ErrorCode::kUnstableSystem:
    case ErrorCode::kNotFactorizable:
    case ErrorCode::kUnstableInverse:
    case ErrorCode::kDegenerateObjective:
    case ErrorCode::kNotDiagonal:
    case ErrorCode::kNotErgodic:
      return 4;
    default:
      return 2;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message),
      code_(code) {}

}  // namespace dpfilter
