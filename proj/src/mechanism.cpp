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

#include "dpfilter/mechanism.hpp"

#include "dpfilter/error.hpp"

namespace dpfilter {

std::string to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kOutputPerturbation: return "output_perturbation";
    case MechanismKind::kZeroForcing: return "zfe";
    case MechanismKind::kWienerSmoother: return "lms_smoother";
    case MechanismKind::kWienerCausal: return "lms_causal";
    case MechanismKind::kDecisionFeedback: return "df";
  }
  return "unknown";
}

MechanismKind parse_mechanism_kind(const std::string& name) {
  if (name == "output_perturbation") return MechanismKind::kOutputPerturbation;
  if (name == "zfe" || name == "zero_forcing") return MechanismKind::kZeroForcing;
  if (name == "lms" || name == "lms_smoother" || name == "wiener_smoother") {
    return MechanismKind::kWienerSmoother;
  }
  if (name == "lms_causal" || name == "wiener_causal") return MechanismKind::kWienerCausal;
  if (name == "df" || name == "decision_feedback") return MechanismKind::kDecisionFeedback;
  throw Error(ErrorCode::kConfigError, "unknown mechanism '" + name + "'");
}

std::string to_string(DecisionDomain domain) {
  switch (domain) {
    case DecisionDomain::kReals: return "reals";
    case DecisionDomain::kNonnegativeIntegers: return "integers";
    case DecisionDomain::kBinary: return "binary";
  }
  return "unknown";
}

DecisionDomain parse_decision_domain(const std::string& name) {
  if (name == "reals") return DecisionDomain::kReals;
  if (name == "integers") return DecisionDomain::kNonnegativeIntegers;
  if (name == "binary" || name == "sign") return DecisionDomain::kBinary;
  throw Error(ErrorCode::kConfigError, "unknown decision domain '" + name + "'");
}

}  // namespace dpfilter
