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

#include <cstdint>

#include "dpfilter/types.hpp"

namespace dpfilter {

// Budget (epsilon, delta) and per-channel adjacency magnitudes k.
struct PrivacySpec {
  double epsilon = 1.0;
  double delta = 0.05;
  Vec k;

  // Throws InvalidDelta or InvalidPrivacySpec.
  void validate() const;
  // Validates and also checks that k has `channels` entries.
  void validate(Eigen::Index channels) const;
};

// Gaussian tail probability P(Z > x).
double q_function(double x);
double q_inverse(double delta);

double kappa(const PrivacySpec& spec);
double noise_sigma(double sensitivity, const PrivacySpec& spec);

// Adds i.i.d. N(0, sigma^2) to every sample, in time-major order.
EventStream add_noise(const EventStream& stream, double sigma,
                      std::uint64_t seed);

}  // namespace dpfilter
