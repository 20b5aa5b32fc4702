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

#include <cstddef>
#include <vector>

#include "dpfilter/mechanism.hpp"
#include "dpfilter/spectral.hpp"

namespace dpfilter {

struct ZfeOptions {
  std::size_t grid_n = 1024;
  int order = 40;          // initial FIR order of each prefilter entry
  double fit_tol = 1e-3;   // target relative error of |G_ii|^2
  int max_order = 1024;
};

// Scalar minimum-phase G with |G|^2 = |F|_2 / k1 for a single-column F.
RationalFilter design_simo_prefilter(const TransferMatrix& f, double k1,
                                     const ZfeOptions& options = {},
                                     ScalarFactor* details = nullptr);

// Diagonal G with |G_ii|^2 = |F_i|_2 / k_i, one factorization per column.
TransferMatrix design_diag_prefilter(
    const TransferMatrix& f, const Vec& k, const ZfeOptions& options = {},
    std::vector<ScalarFactor>* details = nullptr);

// kappa^2 (mean over the circle of sum_i k_i |F_i|_2)^2.
double zfe_mse_diag_bound(const TransferMatrix& f, const PrivacySpec& privacy,
                          std::size_t n = 1024);

// kappa^2 (mean over the circle of ||F K||_*)^2.
double zfe_general_lower_bound(const TransferMatrix& f,
                               const PrivacySpec& privacy,
                               std::size_t n = 1024);

// Mechanism with postfilter F G^-1 and sigma calibrated to ||G K||_2.
MechanismDesign assemble_zfe(const TransferMatrix& f, const TransferMatrix& g,
                             const PrivacySpec& privacy, std::size_t n = 1024);

// Optimal diagonal design plus both bounds in the diagnostics.
MechanismDesign design_zfe(const TransferMatrix& f, const PrivacySpec& privacy,
                           const ZfeOptions& options = {});

// Noise added straight to y = F u. When exact is false the sandwich upper
// bound |k|_2 ||F||_2 calibrates the noise for MIMO F.
MechanismDesign output_perturbation(const TransferMatrix& f,
                                    const PrivacySpec& privacy,
                                    bool exact = true);

}  // namespace dpfilter
