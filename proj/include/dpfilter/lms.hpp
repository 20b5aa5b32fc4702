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

#include "dpfilter/mechanism.hpp"
#include "dpfilter/spectral.hpp"

namespace dpfilter {

// x(q, i) = |g~_ii(e^{j w_q})|^2 for the normalized prefilter G~ = G K / ||G K||_2.
struct AllocationProfile {
  Mat x;
  double lambda = 0.0;
  double objective = 0.0;
  // Relative Frank-Wolfe duality gap certifying optimality (0 for closed forms).
  double gap = 0.0;
  int iterations = 0;

  std::size_t n() const { return static_cast<std::size_t>(x.rows() - 1); }
  Eigen::Index channels() const { return x.cols(); }
};

struct LmsOptions {
  std::size_t grid_n = 1024;
  double constraint_tol = 1e-12;
  double stationarity_tol = 1e-12;
  int max_outer = 400;
  int max_inner = 100;
  // Prefilter realization.
  int order = 40;
  double fit_tol = 1e-3;
  int max_order = 1024;
  double floor_rel = 1e-3;
};

enum class LmsMode { kSmoother, kCausal };

// H = F P G* (G P G* + sigma^2 I)^-1 per frequency.
SpectrumGrid wiener_smoother(const SpectrumGrid& f, const SpectrumGrid& pu,
                             const SpectrumGrid& g, double sigma);

// Mean of Tr[(F - H G) P (F - H G)* + sigma^2 H H*] over the circle.
double linear_estimator_mse(const SpectrumGrid& f, const SpectrumGrid& pu,
                            const SpectrumGrid& g, double sigma,
                            const SpectrumGrid& h);

double lms_objective(const SpectrumGrid& f, const SpectrumGrid& pu,
                     const PrivacySpec& privacy, const Mat& x);

// Trapezoidal mean of sum_i x(q, i); feasible profiles have value 1.
double profile_mass(const Mat& x);

AllocationProfile waterfill_diagonal(const SpectrumGrid& f,
                                     const SpectrumGrid& pu,
                                     const PrivacySpec& privacy);

AllocationProfile optimize_prefilter_general(const SpectrumGrid& f,
                                             const SpectrumGrid& pu,
                                             const PrivacySpec& privacy,
                                             const LmsOptions& options = {});

// Normalized ZFE allocation x_i proportional to k_i |F_i|_2.
AllocationProfile zfe_profile(const SpectrumGrid& f, const PrivacySpec& privacy);

struct CausalWiener {
  MatrixFir filter;             // causal taps, lag 0 upward
  double anticausal_leak = 0.0; // energy fraction of P_yv L^-* at negative lags
  double mse = 0.0;             // analytic MSE of the truncated filter
  MatrixFactorization factor;   // of P_v
};

CausalWiener causal_wiener(const SpectrumGrid& f, const SpectrumGrid& pu,
                           const SpectrumGrid& g, double sigma,
                           const MatrixFactorOptions& options = {});

// Full LMS design: optimal allocation, per-channel prefilter factorization,
// noise calibration and the smoother or causal postfilter.
MechanismDesign assemble_lms(const TransferMatrix& f, const SpectrumGrid& pu,
                             const Vec& mean, const PrivacySpec& privacy,
                             LmsMode mode, const LmsOptions& options = {},
                             AllocationProfile* profile_out = nullptr);

// Drops leading and trailing taps whose magnitude is below rel times the largest.
MatrixFir trim_taps(const MatrixFir& fir, double rel = 1e-13);

}  // namespace dpfilter
