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

#include <optional>

#include "dpfilter/lti.hpp"

namespace dpfilter {

struct SensitivityReport {
  double lower = 0.0;  // ||G K||_2
  double upper = 0.0;  // |k|_2 ||G||_2
  std::optional<double> exact;
  std::optional<int> horizon_used;
};

// k1 ||G||_2 for a single-input system.
double simo_sensitivity(const TransferMatrix& g, double k1);

// ||G K||_2 for a diagonal system.
double diagonal_sensitivity(const TransferMatrix& g, const Vec& k);

SensitivityReport mimo_bounds(const TransferMatrix& g, const Vec& k);
SensitivityReport mimo_bounds(const StateSpace& g, const Vec& k);

// Exact sensitivity from the Gramian cross terms. The scan over relative
// event times stops once a certified bound on the remaining terms cannot
// change any pairwise maximum (or falls below `tol`).
SensitivityReport mimo_exact(const StateSpace& ss, const Vec& k,
                             double tol = 1e-10, int max_horizon = 1000000);

// Enumerates event times in {0..horizon}^m and signs +-k_i. FIR only.
double brute_force_sensitivity(const TransferMatrix& g, const Vec& k,
                               int horizon);

}  // namespace dpfilter
