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

#include "dpfilter/lti.hpp"

namespace dpfilter {

// Nonnegative function sampled at w_q = q*pi/N, q = 0..N.
struct ScalarSpectrum {
  Vec values;

  std::size_t n() const { return static_cast<std::size_t>(values.size() - 1); }
};

struct FactorOptions {
  double floor_rel = 1e-12;
  bool require_paley_wiener = true;
  // When positive, the FIR order is doubled until the relative error of
  // |g|^2 drops below this value or max_order is reached.
  double target_error = 0.0;
  int max_order = 1024;
};

struct ScalarFactor {
  RationalFilter filter;   // minimum-phase FIR
  CVec grid_response;      // exact factor on the half grid, N+1 values
  double grid_error = 0.0;    // max ||g_grid|^2 - s| / max s
  double filter_error = 0.0;  // max ||g_fir|^2 - s| / max s
  int order = 0;
};

bool paley_wiener_check(const ScalarSpectrum& s, double floor_rel = 1e-12);

// Cepstral (Kolmogorov) minimum-phase factor of s, truncated to an FIR.
ScalarFactor scalar_spectral_factor(const ScalarSpectrum& s, int order,
                                    const FactorOptions& options = {});

struct RationalFit {
  RationalFilter filter;  // sqrt(E) / A(z^-1), all-pole and stable
  double residual = 0.0;  // prediction error over geometric mean, minus one
  double condition = 0.0; // r0 / E, conditioning of the Toeplitz system
};

// Autoregressive (Yule-Walker) fit of |g|^2 to s.
RationalFit fit_rational_magnitude(const ScalarSpectrum& s, int order);

struct MatrixFactorization {
  std::vector<Mat> predictor;  // A(z) = L(z)^-1, A_0 = I
  MatrixFir factor;            // L(z), causal, L_0 = I
  Mat innovation;              // Pe
  double residual = 0.0;       // max relative Frobenius error of L Pe L*
  int order = 0;               // predictor order
  int bandwidth = 0;           // autocovariance lags kept
  SpectrumGrid factor_grid;    // L on the grid
  SpectrumGrid predictor_grid; // A on the grid
};

struct MatrixFactorOptions {
  int max_order = 4096;
  double tail_rel = 1e-10;
  double reflection_tol = 1e-13;
  double residual_tol = 1e-6;
};

// Canonical factorization P = L Pe L* with L, L^-1 causal and stable.
MatrixFactorization matrix_canonical_factor(
    const SpectrumGrid& p, const MatrixFactorOptions& options = {});

// Number of times the closed curve traced by `values` winds around zero.
int winding_number(const CVec& values);

}  // namespace dpfilter
