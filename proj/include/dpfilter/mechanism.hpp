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

#include <map>
#include <optional>
#include <string>

#include "dpfilter/lti.hpp"
#include "dpfilter/privacy.hpp"

namespace dpfilter {

enum class MechanismKind {
  kOutputPerturbation,
  kZeroForcing,
  kWienerSmoother,
  kWienerCausal,
  kDecisionFeedback,
};

enum class DecisionDomain { kReals, kNonnegativeIntegers, kBinary };

std::string to_string(MechanismKind kind);
MechanismKind parse_mechanism_kind(const std::string& name);
std::string to_string(DecisionDomain domain);
DecisionDomain parse_decision_domain(const std::string& name);

// A complete mechanism: v = G (u - mean) + w with w ~ N(0, sigma^2 I), then a
// postfilter producing yhat. Which postfilter fields are set depends on kind:
//   output perturbation: prefilter = F, rational_postfilter = I
//   zero forcing:        rational_postfilter = F G^-1
//   Wiener smoother:     fir_postfilter (two-sided)
//   causal Wiener:       fir_postfilter (causal)
//   decision feedback:   fir_postfilter = H1 (lags >= -lookahead),
//                        feedback = H2 (lags >= 1)
struct MechanismDesign {
  MechanismKind kind = MechanismKind::kZeroForcing;
  TransferMatrix target;
  TransferMatrix prefilter;
  PrivacySpec privacy;
  double sensitivity = 0.0;
  double noise_sigma = 0.0;
  std::optional<double> theory_mse;
  Vec input_mean;
  std::optional<TransferMatrix> rational_postfilter;
  std::optional<MatrixFir> fir_postfilter;
  std::optional<MatrixFir> feedback;
  DecisionDomain domain = DecisionDomain::kReals;
  int lookahead = 0;
  std::map<std::string, double> diagnostics;

  Eigen::Index inputs() const { return target.cols(); }
  Eigen::Index outputs() const { return target.rows(); }
  // Channels of the released signal v.
  Eigen::Index released() const { return prefilter.rows(); }
};

}  // namespace dpfilter
